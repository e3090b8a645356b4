import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** Mount the real index.html skeleton (scripts stripped) into the jsdom page. */
export function mountSkeleton(): HTMLElement {
  const html = readFileSync(join(here, "../src/index.html"), "utf-8");
  const body = html.match(/<body>([\s\S]*)<\/body>/)?.[1] ?? "";
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/g, "");
  const root = document.getElementById("chat-root");
  if (!root) throw new Error("index.html lost its #chat-root");
  return root;
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 10_000,
  stepMs = 20
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error("waitFor timed out");
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
}

export interface FakeResponseSpec {
  status?: number;
  json?: unknown;
}

/** Minimal fetch stand-in recording calls and replaying queued responses. */
export function fakeFetch(queue: FakeResponseSpec[] = []) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const spec = queue.length > 0 ? queue.shift()! : { status: 200, json: {} };
    return {
      ok: (spec.status ?? 200) < 400,
      status: spec.status ?? 200,
      json: async () => spec.json ?? {},
    } as Response;
  };
  return { impl, calls, queue };
}
