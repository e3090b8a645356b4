import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  appendMessage,
  bindElements,
  disableAllQuickReplies,
  renderedSeqs,
  setBanner,
  setInputEnabled,
  setTyping,
  type ChatElements,
} from "../src/render.js";
import type { ChatMessage } from "../src/state.js";
import { mountSkeleton } from "./helpers.js";

let elements: ChatElements;

beforeEach(() => {
  elements = bindElements(mountSkeleton());
});

const noHandlers = { onQuickReply: () => {} };

function bot(seq: number, text: string, quickReplies?: ChatMessage["quickReplies"]): ChatMessage {
  return { direction: "bot", seq, key: `k${seq}`, text, quickReplies };
}

describe("appendMessage", () => {
  it("renders text via textContent so markup stays inert", () => {
    appendMessage(elements, bot(1, "<img src=x onerror=boom()>"), noHandlers);
    expect(elements.log.querySelector("img")).toBeNull();
    expect(elements.log.textContent).toContain("<img src=x onerror=boom()>");
  });

  it("tags bot bubbles with their seq, in DOM order", () => {
    appendMessage(elements, bot(1, "a"), noHandlers);
    appendMessage(elements, { direction: "user", text: "hi" }, noHandlers);
    appendMessage(elements, bot(2, "b"), noHandlers);
    expect(renderedSeqs(elements)).toEqual([1, 2]);
    expect(elements.log.children).toHaveLength(3);
  });

  it("renders quick replies as buttons carrying integer payloads", () => {
    appendMessage(
      elements,
      bot(1, "scale?", [
        { label: "1", payload: 1 },
        { label: "7", payload: 7 },
      ]),
      noHandlers
    );
    const buttons = elements.log.querySelectorAll<HTMLButtonElement>("button.quick-reply");
    expect(buttons).toHaveLength(2);
    expect(buttons[1].textContent).toBe("7");
    expect(buttons[1].dataset.payload).toBe("7");
  });

  it("click fires the handler once and disables the row", () => {
    const onQuickReply = vi.fn();
    appendMessage(
      elements,
      bot(1, "q", [
        { label: "1", payload: 1 },
        { label: "2", payload: 2 },
      ]),
      { onQuickReply }
    );
    const buttons = elements.log.querySelectorAll<HTMLButtonElement>("button.quick-reply");
    buttons[1].click();
    buttons[0].click(); // row already answered
    buttons[1].click();
    expect(onQuickReply).toHaveBeenCalledTimes(1);
    expect(onQuickReply).toHaveBeenCalledWith(2, "2");
    expect(buttons[0].disabled).toBe(true);
    expect(buttons[1].classList.contains("quick-reply--chosen")).toBe(true);
  });

  it("disableAllQuickReplies sweeps older questions", () => {
    appendMessage(elements, bot(1, "q1", [{ label: "1", payload: 1 }]), noHandlers);
    appendMessage(elements, bot(2, "q2", [{ label: "2", payload: 2 }]), noHandlers);
    disableAllQuickReplies(elements);
    const buttons = elements.log.querySelectorAll<HTMLButtonElement>("button.quick-reply");
    expect(Array.from(buttons).every((b) => b.disabled)).toBe(true);
  });
});

describe("chrome widgets", () => {
  it("typing indicator toggles", () => {
    setTyping(elements, true);
    expect(elements.typing.classList.contains("hidden")).toBe(false);
    setTyping(elements, false);
    expect(elements.typing.classList.contains("hidden")).toBe(true);
  });

  it("banner shows a message with a working retry button", () => {
    const retry = vi.fn();
    setBanner(elements, "Cannot reach the survey gateway.", retry);
    expect(elements.banner.classList.contains("hidden")).toBe(false);
    expect(elements.banner.textContent).toContain("Cannot reach");
    elements.banner.querySelector<HTMLButtonElement>("button.banner-retry")!.click();
    expect(retry).toHaveBeenCalledTimes(1);
    setBanner(elements, null);
    expect(elements.banner.classList.contains("hidden")).toBe(true);
  });

  it("input disable covers both the field and the send button", () => {
    setInputEnabled(elements, false);
    expect(elements.input.disabled).toBe(true);
    expect(elements.sendButton.disabled).toBe(true);
    setInputEnabled(elements, true);
    expect(elements.input.disabled).toBe(false);
  });
});
