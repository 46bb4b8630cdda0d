/** Server-sent-events reader over fetch streaming.
 *
 * Written against ReadableStream rather than EventSource so the same code
 * runs in the browser and under node-based tests.
 */

export interface StreamEvent {
  event: string;
  data: unknown;
}

export interface SseMessage {
  event?: string;
  data?: string;
}

/** Incremental SSE parser; feed() returns the messages completed so far. */
export class SseParser {
  private buffer = "";
  private current: SseMessage = {};

  feed(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    let index;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).replace(/\r$/, "");
      this.buffer = this.buffer.slice(index + 1);
      if (line === "") {
        const done = this.flush();
        if (done) events.push(done);
      } else if (line.startsWith(":")) {
        continue; // keepalive comment
      } else if (line.startsWith("event:")) {
        this.current.event = line.slice(6).trim();
      } else if (line.startsWith("data:")) {
        const piece = line.slice(5).replace(/^ /, "");
        this.current.data = this.current.data === undefined
          ? piece
          : `${this.current.data}\n${piece}`;
      }
    }
    return events;
  }

  private flush(): StreamEvent | null {
    const { event, data } = this.current;
    this.current = {};
    if (data === undefined) return null;
    let parsed: unknown = data;
    try {
      parsed = JSON.parse(data);
    } catch {
      // non-JSON data lines pass through verbatim
    }
    return { event: event ?? "message", data: parsed };
  }
}

export interface StreamCallbacks {
  onEvent: (event: StreamEvent) => void;
  onConnect?: () => void;
  onDisconnect?: (error: unknown) => void;
}

export interface StreamOptions {
  fetchFn?: typeof fetch;
  retryMs?: number;
  /** sleep hook, injectable for tests */
  delay?: (ms: number) => Promise<void>;
}

const defaultDelay = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** Reads one SSE response to completion, dispatching parsed events. */
export async function readSseStream(
  url: string,
  onEvent: (event: StreamEvent) => void,
  fetchFn: typeof fetch = fetch,
  signal?: AbortSignal,
): Promise<void> {
  const response = await fetchFn(url, { signal, headers: { accept: "text/event-stream" } });
  if (!response.ok || response.body === null) {
    throw new Error(`stream failed: HTTP ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  for (;;) {
    const { done, value } = await reader.read();
    if (done) return;
    for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
      onEvent(event);
    }
  }
}

/** Long-lived subscription with automatic reconnect. */
export class StreamClient {
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: StreamCallbacks,
    private readonly options: StreamOptions = {},
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    const fetchFn = this.options.fetchFn ?? fetch;
    const retryMs = this.options.retryMs ?? 1000;
    const delay = this.options.delay ?? defaultDelay;
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        this.callbacks.onConnect?.();
        await readSseStream(this.url, this.callbacks.onEvent, fetchFn,
          this.controller.signal);
        this.callbacks.onDisconnect?.(null);
      } catch (error) {
        if (this.stopped) return;
        this.callbacks.onDisconnect?.(error);
      }
      if (!this.stopped) await delay(retryMs);
    }
  }
}
