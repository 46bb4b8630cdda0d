/** Browser wiring: panels, stream subscription, canvas redraw loop. */

import { ApiClient, Hand, QuizReport } from "./api.js";
import { drawHand, layoutHand } from "./handview.js";
import { StreamClient } from "./stream.js";
import { ConsoleViewModel } from "./viewmodel.js";

const base = window.location.pathname.startsWith("/ui")
  ? window.location.origin
  : "http://127.0.0.1:8470";

const api = new ApiClient(base);
const vm = new ConsoleViewModel(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const banner = el<HTMLDivElement>("banner");
const staleBadge = el<HTMLSpanElement>("stale");
const canvas = el<HTMLCanvasElement>("hand");
const ctx = canvas.getContext("2d")!;
const signText = el<HTMLInputElement>("sign-text");
const signPreview = el<HTMLDivElement>("sign-preview");
const handPicker = el<HTMLSelectElement>("handedness");
const speedSlider = el<HTMLInputElement>("speed");
const speedLabel = el<HTMLSpanElement>("speed-label");
const eventFeed = el<HTMLUListElement>("events");
const queueView = el<HTMLDivElement>("queue");
const quizSeed = el<HTMLInputElement>("quiz-seed");
const quizStatus = el<HTMLDivElement>("quiz-status");
const guessLetter = el<HTMLSelectElement>("guess-letter");
const guessHand = el<HTMLSelectElement>("guess-hand");
const reportView = el<HTMLDivElement>("report");
const errorView = el<HTMLDivElement>("error");

for (const letter of "ABCDEFGHIJKLMNOPQRSTUVWXYZ") {
  const option = document.createElement("option");
  option.value = letter;
  option.textContent = letter;
  guessLetter.appendChild(option);
}

const stream = new StreamClient(api.streamUrl(), {
  onEvent: (event) => vm.handleEvent(event),
  onConnect: () => vm.handleConnect(),
  onDisconnect: () => vm.handleDisconnect(),
});
stream.start();

function renderReport(report: QuizReport): void {
  const cells = report.rows.map((row) => {
    const fmt = (v: number | null) => (v === null ? "-" : v.toFixed(2));
    return `<tr><td>${row.letter}</td><td>${fmt(row.left)}</td>` +
      `<td>${fmt(row.right)}</td></tr>`;
  }).join("");
  reportView.innerHTML =
    `<h3>Recognition report (seed ${report.seed})</h3>` +
    `<p>${report.total_correct}/${report.total_shown} correct = ` +
    `<strong>${report.accuracy.toFixed(2)}%</strong></p>` +
    `<table><thead><tr><th>Letter</th><th>Left</th><th>Right</th></tr></thead>` +
    `<tbody>${cells}</tbody></table>`;
}

function redraw(): void {
  banner.hidden = vm.connection === "connected";
  staleBadge.hidden = !vm.isStale();
  if (vm.pose) {
    drawHand(ctx, layoutHand(vm.pose, canvas.width, vm.isStale()));
  }
  const recent = vm.events.slice(-12).reverse();
  eventFeed.innerHTML = recent
    .map((e) => `<li>${e.kind === "begin" ? "&#9655;" : "&#9632;"} ` +
      `${e.letter} <small>${e.hand}</small></li>`)
    .join("");
  queueView.textContent = vm.currentJob
    ? `signing ${vm.currentJob.letters.join("")} ` +
      (vm.queue.length ? `(+${vm.queue.length} queued)` : "")
    : vm.queue.length ? `${vm.queue.length} queued` : "idle";
  if (vm.quiz.active) {
    quizStatus.textContent = `trial ${vm.quiz.position + 1} of ${vm.quiz.total} - ` +
      "what letter, which hand?";
  } else if (vm.quiz.report) {
    quizStatus.textContent = "session complete";
  } else {
    quizStatus.textContent = "no session";
  }
  errorView.textContent = vm.lastError ?? "";
  requestAnimationFrame(redraw);
}
requestAnimationFrame(redraw);

setInterval(() => void vm.refreshStatus().catch(() => undefined), 500);

signText.addEventListener("input", () => {
  const { letters, dropped } = vm.previewFilter(signText.value);
  signPreview.textContent = letters.length
    ? `will sign: ${letters.join("")}` +
      (dropped.length ? ` (dropping ${dropped.join(" ")})` : "")
    : "type letters A-Z";
});

signText.addEventListener("keydown", (event) => {
  if (event.key !== "Enter" || !signText.value.trim()) return;
  void vm.submitText(signText.value)
    .then(() => { signText.value = ""; signPreview.textContent = ""; })
    .catch(() => undefined);
});

handPicker.addEventListener("change", () => {
  vm.settings.handedness = handPicker.value as Hand;
});

speedSlider.addEventListener("input", () => {
  vm.settings.speedScale = Number(speedSlider.value);
  speedLabel.textContent = `${vm.settings.speedScale.toFixed(2)}x`;
});

el<HTMLButtonElement>("stop").addEventListener("click", () => {
  void vm.stop().catch(() => undefined);
});

el<HTMLButtonElement>("quiz-start").addEventListener("click", () => {
  const seed = Number(quizSeed.value || "0");
  reportView.innerHTML = "";
  void vm.startQuiz(seed).catch(() => undefined);
});

el<HTMLButtonElement>("guess-submit").addEventListener("click", () => {
  void vm.answer(guessLetter.value, guessHand.value as Hand)
    .then((response) => {
      if (response.done && response.report) renderReport(response.report);
    })
    .catch(() => undefined);
});
