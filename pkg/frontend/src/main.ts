/**
 * Controller: wires the loopback client, state, poller, and DOM together.
 * One controller per tab; the user id lives in sessionStorage, so separate
 * tabs get separate simulated users while a reload resumes the session.
 */

import { ApiError, LoopbackApi, type FetchLike } from "./api.js";
import { Poller } from "./poller.js";
import {
  bindElements,
  appendMessage,
  disableAllQuickReplies,
  renderedSeqs,
  setBanner,
  setInputEnabled,
  setStatus,
  setTyping,
  type ChatElements,
} from "./render.js";
import { ChatState } from "./state.js";

export interface BootOptions {
  baseUrl?: string;
  userId?: string;
  pollIntervalMs?: number;
  replyTimeoutMs?: number;
  storage?: Pick<Storage, "getItem" | "setItem">;
  fetchImpl?: FetchLike;
}

const USER_KEY = "surveybot-user-id";

export function allocateUserId(storage?: Pick<Storage, "getItem" | "setItem">): string {
  const existing = storage?.getItem(USER_KEY);
  if (existing) return existing;
  const fresh = `web-${Math.random().toString(16).slice(2, 14)}`;
  storage?.setItem(USER_KEY, fresh);
  return fresh;
}

export class ChatController {
  readonly userId: string;
  readonly state = new ChatState();
  readonly elements: ChatElements;

  private readonly api: LoopbackApi;
  private readonly poller: Poller;
  private readonly replyTimeoutMs: number;
  private awaitingReplySince: number | null = null;

  constructor(root: HTMLElement, options: BootOptions = {}) {
    this.userId = options.userId ?? allocateUserId(options.storage);
    this.elements = bindElements(root);
    this.api = new LoopbackApi(options.baseUrl ?? "", options.fetchImpl);
    this.replyTimeoutMs = options.replyTimeoutMs ?? 20_000;
    this.poller = new Poller(() => this.tick(), options.pollIntervalMs ?? 500);

    this.elements.form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.elements.input.value.trim();
      if (!text) return;
      this.elements.input.value = "";
      void this.sendText(text);
    });
    setStatus(this.elements, `You are chatting as ${this.userId}`);
  }

  start(): void {
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  /** Send typed text as the user. */
  async sendText(text: string): Promise<void> {
    appendMessage(this.elements, this.state.addUserMessage(text), this.handlers());
    disableAllQuickReplies(this.elements);
    await this.deliver(() => this.api.send(this.userId, text));
  }

  /** Quick-reply click: same lane as typing the digit, sent as the payload. */
  async sendQuickReply(payload: number, label: string): Promise<void> {
    appendMessage(this.elements, this.state.addUserMessage(label), this.handlers());
    await this.deliver(() => this.api.send(this.userId, undefined, payload));
  }

  renderedSeqs(): number[] {
    return renderedSeqs(this.elements);
  }

  private handlers() {
    return {
      onQuickReply: (payload: number, label: string) => {
        void this.sendQuickReply(payload, label);
      },
    };
  }

  private async deliver(send: () => Promise<string>): Promise<void> {
    setTyping(this.elements, true);
    this.awaitingReplySince = Date.now();
    try {
      await send();
      setBanner(this.elements, null);
    } catch (error) {
      setTyping(this.elements, false);
      this.awaitingReplySince = null;
      this.showConnectionError(error);
      return;
    }
    await this.poller.pokeNow();
  }

  private async tick(): Promise<void> {
    let response;
    try {
      response = await this.api.messagesAfter(this.userId, this.state.lastSeq);
    } catch (error) {
      this.showConnectionError(error);
      return;
    }
    const added = this.state.addOutbound(response.messages);
    if (added.length > 0) {
      setBanner(this.elements, null);
      setTyping(this.elements, false);
      this.awaitingReplySince = null;
      disableAllQuickReplies(this.elements);
      for (const message of added) {
        appendMessage(this.elements, message, this.handlers());
      }
    }
    if (response.finalized && !this.state.finalized) {
      this.state.finalized = true;
      setInputEnabled(this.elements, false);
      setTyping(this.elements, false);
      setStatus(this.elements, "Survey complete. Thank you!");
      this.poller.stop();
      return;
    }
    if (
      this.awaitingReplySince !== null &&
      Date.now() - this.awaitingReplySince > this.replyTimeoutMs
    ) {
      setTyping(this.elements, false);
      this.awaitingReplySince = null;
      setBanner(this.elements, "TIMEOUT: no reply from the survey bot.");
    }
  }

  private showConnectionError(error: unknown): void {
    const detail = error instanceof ApiError ? ` (${error.message})` : "";
    setBanner(this.elements, `Cannot reach the survey gateway${detail}.`, () => {
      setBanner(this.elements, null);
      void this.poller.pokeNow();
    });
  }
}

export function boot(root: HTMLElement, options: BootOptions = {}): ChatController {
  const controller = new ChatController(root, options);
  controller.start();
  return controller;
}
