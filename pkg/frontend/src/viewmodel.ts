/** Console state: everything the panels render, nothing invented.
 *
 * Poses only ever come from the server stream; the view model never
 * synthesizes joint angles.  Quiz guesses are validated (letter, hand)
 * pairs posted straight to the service.
 */

import {
  ApiClient,
  Hand,
  JobSummary,
  QuizAnswerResponse,
  QuizReport,
  SignResponse,
} from "./api.js";
import { StreamEvent } from "./stream.js";

export type Pose = Record<string, number>;

export type Connection = "connecting" | "connected" | "disconnected";

export interface SignEventView {
  kind: "begin" | "end";
  letter: string;
  hand: Hand;
  tMs: number;
}

export interface QuizView {
  active: boolean;
  position: number;
  total: number;
  report: QuizReport | null;
}

export interface Settings {
  handedness: Hand;
  speedScale: number;
}

export const LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/** Mirror of the service's input policy, for form preview only. */
export function filterLetters(text: string): { letters: string[]; dropped: string[] } {
  const letters: string[] = [];
  const dropped: string[] = [];
  for (const ch of text) {
    const up = ch.toUpperCase();
    if (LETTERS.includes(up)) letters.push(up);
    else if (!/\s/.test(ch)) dropped.push(ch);
  }
  return { letters, dropped };
}

export function validateGuessLetter(raw: string): string | null {
  const up = raw.trim().toUpperCase();
  return up.length === 1 && LETTERS.includes(up) ? up : null;
}

const EVENT_FEED_LIMIT = 80;

export class ConsoleViewModel {
  connection: Connection = "connecting";
  pose: Pose | null = null;
  lastPoseAtMs: number | null = null;
  events: SignEventView[] = [];
  queue: JobSummary[] = [];
  currentJob: JobSummary | null = null;
  quiz: QuizView = { active: false, position: 0, total: 0, report: null };
  settings: Settings = { handedness: "right", speedScale: 1.25 };
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly now: () => number = () => Date.now(),
  ) {}

  // -- stream side ----------------------------------------------------------

  handleConnect(): void {
    this.connection = "connected";
  }

  handleDisconnect(): void {
    this.connection = "disconnected";
  }

  handleEvent(event: StreamEvent): void {
    const data = event.data as Record<string, unknown>;
    switch (event.event) {
      case "pose": {
        this.pose = data["angles"] as Pose;
        this.lastPoseAtMs = this.now();
        break;
      }
      case "sign": {
        this.events.push({
          kind: data["kind"] as "begin" | "end",
          letter: data["letter"] as string,
          hand: data["hand"] as Hand,
          tMs: data["t_ms"] as number,
        });
        if (this.events.length > EVENT_FEED_LIMIT) {
          this.events.splice(0, this.events.length - EVENT_FEED_LIMIT);
        }
        break;
      }
      case "quiz": {
        if (data["state"] === "done") break; // the answer response carries the report
        this.quiz.active = true;
        this.quiz.position = (data["position"] as number) ?? this.quiz.position;
        this.quiz.total = (data["total"] as number) ?? this.quiz.total;
        break;
      }
      default:
        break; // job events surface through polled status
    }
  }

  /** True when no pose has arrived for longer than the threshold. */
  isStale(thresholdMs = 2000): boolean {
    if (this.lastPoseAtMs === null) return true;
    return this.now() - this.lastPoseAtMs > thresholdMs;
  }

  // -- signing --------------------------------------------------------------

  previewFilter(text: string): { letters: string[]; dropped: string[] } {
    return filterLetters(text);
  }

  async submitText(text: string): Promise<SignResponse> {
    this.lastError = null;
    try {
      return await this.api.sign(text, this.settings.handedness,
        this.settings.speedScale);
    } catch (error) {
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
  }

  async stop(): Promise<void> {
    await this.api.stop();
    this.quiz = { active: false, position: 0, total: 0, report: null };
  }

  async refreshStatus(): Promise<void> {
    const status = await this.api.status();
    this.queue = status.queue;
    this.currentJob = status.current_job;
    if (status.quiz === null && this.quiz.active && this.quiz.report === null) {
      // a quiz aborted server-side (e.g. stop from another client)
      this.quiz.active = false;
    }
  }

  // -- quiz -----------------------------------------------------------------

  async startQuiz(seed: number, participant?: string, cohort?: string): Promise<void> {
    this.lastError = null;
    try {
      const started = await this.api.quizStart(seed, participant, cohort);
      this.quiz = { active: true, position: 0, total: started.total, report: null };
    } catch (error) {
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
  }

  async answer(rawLetter: string, hand: Hand): Promise<QuizAnswerResponse> {
    const letter = validateGuessLetter(rawLetter);
    if (letter === null) {
      this.lastError = `not a letter: ${rawLetter}`;
      throw new Error(this.lastError);
    }
    const response = await this.api.quizAnswer(letter, hand);
    this.quiz.position = response.position;
    this.quiz.total = response.total;
    if (response.done && response.report) {
      this.quiz.active = false;
      this.quiz.report = response.report;
    }
    return response;
  }
}
