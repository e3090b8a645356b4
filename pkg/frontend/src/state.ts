/**
 * Conversation state for one session.
 *
 * Outbound messages are keyed by seq and always exposed in seq order, no
 * matter how a poll response was ordered; user messages are appended at send
 * time. The renderer consumes the combined list as-is.
 */

import type { OutboundMessage, QuickReply } from "./api.js";

export interface ChatMessage {
  direction: "user" | "bot";
  text: string;
  seq?: number; // bot messages only
  key?: string;
  quickReplies?: QuickReply[];
}

export class ChatState {
  readonly messages: ChatMessage[] = [];
  lastSeq = 0;
  finalized = false;

  private seenSeqs = new Set<number>();

  addUserMessage(text: string): ChatMessage {
    const message: ChatMessage = { direction: "user", text };
    this.messages.push(message);
    return message;
  }

  /**
   * Merge a poll batch. Returns the messages that were actually new, in seq
   * order; replayed history (after=0 on reload) dedupes by seq.
   */
  addOutbound(batch: OutboundMessage[]): ChatMessage[] {
    const fresh = batch
      .filter((m) => !this.seenSeqs.has(m.seq))
      .sort((a, b) => a.seq - b.seq);
    const added: ChatMessage[] = [];
    for (const m of fresh) {
      this.seenSeqs.add(m.seq);
      this.lastSeq = Math.max(this.lastSeq, m.seq);
      const message: ChatMessage = {
        direction: "bot",
        text: m.text,
        seq: m.seq,
        key: m.key,
        quickReplies: m.quick_replies,
      };
      // insert before the first bot message with a higher seq, so even an
      // arrival-order violation still displays in seq order
      let at = this.messages.length;
      for (let i = 0; i < this.messages.length; i += 1) {
        const existing = this.messages[i];
        if (existing.direction === "bot" && (existing.seq as number) > m.seq) {
          at = i;
          break;
        }
      }
      this.messages.splice(at, 0, message);
      added.push(message);
    }
    return added;
  }

  /** Seqs of bot messages in display order; must always be ascending. */
  botSeqs(): number[] {
    return this.messages
      .filter((m) => m.direction === "bot")
      .map((m) => m.seq as number);
  }

  lastBotMessage(): ChatMessage | undefined {
    for (let i = this.messages.length - 1; i >= 0; i -= 1) {
      if (this.messages[i].direction === "bot") return this.messages[i];
    }
    return undefined;
  }
}
