/**
 * DOM rendering. Message text goes through textContent, never innerHTML.
 */

import type { ChatMessage } from "./state.js";

export interface RenderHandlers {
  onQuickReply: (payload: number, label: string) => void;
}

export interface ChatElements {
  root: HTMLElement;
  log: HTMLElement;
  form: HTMLFormElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  typing: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
}

/** Locate the fixed skeleton from index.html inside `root`. */
export function bindElements(root: HTMLElement): ChatElements {
  const pick = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) throw new Error(`chat skeleton is missing ${selector}`);
    return el;
  };
  return {
    root,
    log: pick(".chat-log"),
    form: pick<HTMLFormElement>("form.chat-form"),
    input: pick<HTMLInputElement>("input.chat-input"),
    sendButton: pick<HTMLButtonElement>("button.chat-send"),
    typing: pick(".chat-typing"),
    banner: pick(".chat-banner"),
    status: pick(".chat-status"),
  };
}

export function appendMessage(
  elements: ChatElements,
  message: ChatMessage,
  handlers: RenderHandlers,
  doc: Document = elements.root.ownerDocument
): HTMLElement {
  const bubble = doc.createElement("div");
  bubble.className = `bubble bubble--${message.direction}`;
  if (message.seq !== undefined) bubble.dataset.seq = String(message.seq);
  if (message.key) bubble.dataset.key = message.key;

  const text = doc.createElement("div");
  text.className = "bubble-text";
  text.textContent = message.text;
  bubble.appendChild(text);

  if (message.quickReplies && message.quickReplies.length > 0) {
    const row = doc.createElement("div");
    row.className = "quick-replies";
    for (const reply of message.quickReplies) {
      const button = doc.createElement("button");
      button.type = "button";
      button.className = "quick-reply";
      button.textContent = reply.label;
      button.dataset.payload = String(reply.payload);
      button.addEventListener("click", () => {
        if (button.disabled) return;
        disableQuickReplies(row);
        button.classList.add("quick-reply--chosen");
        handlers.onQuickReply(reply.payload, reply.label);
      });
      row.appendChild(button);
    }
    bubble.appendChild(row);
  }

  if (message.seq !== undefined) {
    // keep the display in seq order no matter the arrival order
    const later = Array.from(
      elements.log.querySelectorAll<HTMLElement>("[data-seq]")
    ).find((el) => Number(el.dataset.seq) > (message.seq as number));
    elements.log.insertBefore(bubble, later ?? null);
  } else {
    elements.log.appendChild(bubble);
  }
  elements.log.scrollTop = elements.log.scrollHeight;
  return bubble;
}

function disableQuickReplies(row: Element): void {
  for (const button of row.querySelectorAll<HTMLButtonElement>("button.quick-reply")) {
    button.disabled = true;
  }
}

/** Answered questions should not keep live buttons around. */
export function disableAllQuickReplies(elements: ChatElements): void {
  for (const row of elements.log.querySelectorAll(".quick-replies")) {
    disableQuickReplies(row);
  }
}

export function setTyping(elements: ChatElements, visible: boolean): void {
  elements.typing.classList.toggle("hidden", !visible);
}

export function setBanner(
  elements: ChatElements,
  message: string | null,
  onRetry?: () => void,
  doc: Document = elements.root.ownerDocument
): void {
  elements.banner.textContent = "";
  if (message === null) {
    elements.banner.classList.add("hidden");
    return;
  }
  elements.banner.classList.remove("hidden");
  const label = doc.createElement("span");
  label.textContent = message;
  elements.banner.appendChild(label);
  if (onRetry) {
    const retry = doc.createElement("button");
    retry.type = "button";
    retry.className = "banner-retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", onRetry);
    elements.banner.appendChild(retry);
  }
}

export function setInputEnabled(elements: ChatElements, enabled: boolean): void {
  elements.input.disabled = !enabled;
  elements.sendButton.disabled = !enabled;
}

export function setStatus(elements: ChatElements, text: string): void {
  elements.status.textContent = text;
}

/** Seq values in DOM order, for the "never reordered" check. */
export function renderedSeqs(elements: ChatElements): number[] {
  return Array.from(elements.log.querySelectorAll<HTMLElement>("[data-seq]")).map(
    (el) => Number(el.dataset.seq)
  );
}
