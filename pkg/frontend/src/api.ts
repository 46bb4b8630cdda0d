/** Typed client for the hand control service (see API.md in the repo root). */

export type Hand = "right" | "left";

export interface JobSummary {
  id: number;
  letters: string[];
}

export interface StatusResponse {
  mode: "idle" | "signing" | "quiz";
  backend: string;
  pose: Record<string, number>;
  queue: JobSummary[];
  current_job: { id: number; letters: string[]; hand: Hand } | null;
  quiz: { position: number; total: number } | null;
  uptime_ms: number;
}

export interface SignResponse {
  job_id: number;
  letters: string[];
  dropped: string[];
}

export interface QuizStartResponse {
  seed: number;
  total: number;
  position: number;
}

export interface ReportRow {
  letter: string;
  left: number | null;
  right: number | null;
}

export interface QuizReport {
  seed: number;
  participant: string;
  cohort: string;
  total_shown: number;
  total_correct: number;
  accuracy: number;
  rows: ReportRow[];
  cohorts: Record<string, { shown: number; correct: number; accuracy: number }>;
}

export interface QuizAnswerResponse {
  done: boolean;
  position: number;
  total: number;
  report?: QuizReport;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        (payload as { error?: string }).error ?? "error",
        (payload as { detail?: string }).detail ?? `HTTP ${response.status}`,
      );
    }
    return payload as T;
  }

  status(): Promise<StatusResponse> {
    return this.request("GET", "/status");
  }

  sign(text: string, handedness: Hand, speedScale?: number): Promise<SignResponse> {
    return this.request("POST", "/sign", {
      text,
      handedness,
      ...(speedScale !== undefined ? { speed_scale: speedScale } : {}),
    });
  }

  stop(): Promise<{ stopped: boolean }> {
    return this.request("POST", "/stop", {});
  }

  quizStart(seed: number, participant?: string, cohort?: string): Promise<QuizStartResponse> {
    return this.request("POST", "/quiz/start", {
      seed,
      ...(participant ? { participant } : {}),
      ...(cohort ? { cohort } : {}),
    });
  }

  quizAnswer(letter: string, handedness: Hand): Promise<QuizAnswerResponse> {
    return this.request("POST", "/quiz/answer", { letter, handedness });
  }

  streamUrl(maxEvents?: number): string {
    const suffix = maxEvents === undefined ? "" : `?max_events=${maxEvents}`;
    return `${this.baseUrl}/stream${suffix}`;
  }
}
