/**
 * Typed client for the gateway's loopback channel.
 *
 * POST /local/messages injects a user message; GET /local/messages returns
 * outbound messages after a seq cursor plus the session's finalized flag.
 */

export interface QuickReply {
  label: string;
  payload: number;
}

export interface OutboundMessage {
  seq: number;
  text: string;
  key: string;
  chunk_index: number;
  chunk_count: number;
  quick_replies: QuickReply[];
}

export interface PollResponse {
  sender_id: string;
  finalized: boolean;
  messages: OutboundMessage[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "ApiError";
  }
}

export class LoopbackApi {
  private counter = 0;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  /** Send typed text or a quick-reply payload; resolves to the gateway status. */
  async send(senderId: string, text?: string, payload?: number | string): Promise<string> {
    this.counter += 1;
    const body: Record<string, unknown> = {
      sender_id: senderId,
      // unique per send: the gateway dedupes on (sender, timestamp, text, payload)
      timestamp: Date.now() * 100 + this.counter,
    };
    if (text !== undefined) body.text = text;
    if (payload !== undefined) body.quick_reply_payload = String(payload);
    const response = await this.fetchImpl(`${this.baseUrl}/local/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(`send failed: HTTP ${response.status}`, response.status);
    }
    const data = (await response.json()) as { status?: string };
    return data.status ?? "";
  }

  /** Outbound messages with seq greater than `after`. */
  async messagesAfter(senderId: string, after: number, waitS = 0): Promise<PollResponse> {
    const params = new URLSearchParams({
      sender_id: senderId,
      after: String(after),
    });
    if (waitS > 0) params.set("wait", String(waitS));
    const response = await this.fetchImpl(`${this.baseUrl}/local/messages?${params}`);
    if (!response.ok) {
      throw new ApiError(`poll failed: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as PollResponse;
  }
}
