import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { digitChain, fingertip, layoutHand, REQUIRED_JOINTS } from "../src/handview.js";
import { SseParser } from "../src/stream.js";
import {
  ConsoleViewModel,
  filterLetters,
  validateGuessLetter,
  type Pose,
} from "../src/viewmodel.js";

function neutralPose(): Pose {
  const pose: Pose = {};
  for (const joint of REQUIRED_JOINTS) {
    if (joint.endsWith(".flex1") || joint.endsWith(".flex2") || joint.endsWith(".flex3")) {
      pose[joint] = 0;
    } else if (joint === "thumb.abd") pose[joint] = 97.5;
    else if (joint === "index.abd" || joint === "pinky.abd") pose[joint] = 50;
    else if (joint === "middle.abd" || joint === "ring.abd") pose[joint] = 22.5;
    else if (joint === "thumb.pronsup") pose[joint] = 90;
    else if (joint === "wrist.radial") pose[joint] = 72.5;
    else if (joint === "wrist.flexext") pose[joint] = 95;
    else if (joint === "forearm.pronsup") pose[joint] = 135;
  }
  return pose;
}

describe("letter filtering", () => {
  it("keeps A-Z, reports the rest, ignores whitespace", () => {
    expect(filterLetters("h3!i")).toEqual({ letters: ["H", "I"], dropped: ["3", "!"] });
    expect(filterLetters("Hi there")).toEqual({
      letters: ["H", "I", "T", "H", "E", "R", "E"],
      dropped: [],
    });
  });

  it("validates single-letter guesses", () => {
    expect(validateGuessLetter(" q ")).toBe("Q");
    expect(validateGuessLetter("5")).toBeNull();
    expect(validateGuessLetter("ab")).toBeNull();
    expect(validateGuessLetter("")).toBeNull();
  });
});

describe("SSE parser", () => {
  it("parses events split across chunks and skips keepalives", () => {
    const parser = new SseParser();
    expect(parser.feed("event: pose\nda")).toEqual([]);
    const events = parser.feed('ta: {"t_ms": 5}\n\n: keepalive\n\n');
    expect(events).toEqual([{ event: "pose", data: { t_ms: 5 } }]);
  });

  it("passes non-JSON data through verbatim", () => {
    const events = new SseParser().feed("data: plain text\n\n");
    expect(events).toEqual([{ event: "message", data: "plain text" }]);
  });
});

describe("hand layout", () => {
  it("requires all 24 joints", () => {
    expect(REQUIRED_JOINTS).toHaveLength(24);
    const pose = neutralPose();
    delete pose["ring.flex2"];
    expect(() => layoutHand(pose)).toThrow(/ring\.flex2/);
  });

  it("straight fingers land collinear, curled fingertips pull toward the palm", () => {
    const chainStraight = digitChain([0, 0], 90, [30, 20, 10], [0, 0, 0], 1);
    const xs = chainStraight.map(([x]) => x);
    expect(Math.max(...xs) - Math.min(...xs)).toBeLessThan(1e-9);

    const open = layoutHand(neutralPose());
    const fist = neutralPose();
    for (const f of ["index", "middle", "ring", "pinky"]) {
      fist[`${f}.flex1`] = 90;
      fist[`${f}.flex2`] = 100;
      fist[`${f}.flex3`] = 90;
    }
    const closed = layoutHand(fist);
    // fingertip of the index is much lower (closer to the palm) in a fist
    expect(fingertip(closed, "finger", 0)[1]).toBeGreaterThan(
      fingertip(open, "finger", 0)[1] + 40); // canvas y grows downward
  });

  it("abduction splays symmetric around neutral", () => {
    const left = neutralPose();
    left["index.abd"] = 20;
    const right = neutralPose();
    right["index.abd"] = 80;
    const neutralTip = fingertip(layoutHand(neutralPose()), "finger", 0);
    const tipLow = fingertip(layoutHand(left), "finger", 0);
    const tipHigh = fingertip(layoutHand(right), "finger", 0);
    const dLow = tipLow[0] - neutralTip[0];
    const dHigh = tipHigh[0] - neutralTip[0];
    expect(Math.sign(dLow)).not.toBe(Math.sign(dHigh));
    expect(Math.abs(dLow + dHigh)).toBeLessThan(1e-6);
  });

  it("wrist deviation rotates the whole hand", () => {
    const rotated = neutralPose();
    rotated["wrist.radial"] = 120;
    const a = layoutHand(neutralPose());
    const b = layoutHand(rotated);
    const moved = b.strokes.flatMap((s, i) =>
      s.points.map(([x, y], k) => {
        const [ax, ay] = a.strokes[i].points[k];
        return Math.hypot(x - ax, y - ay);
      }));
    expect(Math.max(...moved)).toBeGreaterThan(10);
    // wrist origin stays put under pure rotation
    const wristA = a.strokes.find((s) => s.kind === "wrist")!.points[0];
    const wristB = b.strokes.find((s) => s.kind === "wrist")!.points[0];
    expect(Math.hypot(wristA[0] - wristB[0], wristA[1] - wristB[1])).toBeLessThan(1e-6);
  });

  it("is deterministic", () => {
    const pose = neutralPose();
    expect(layoutHand(pose)).toEqual(layoutHand(pose));
  });
});

describe("view model", () => {
  const api = new ApiClient("http://unused", (() => {
    throw new Error("no network in unit tests");
  }) as unknown as typeof fetch);

  it("stores poses only from the stream and tracks staleness", () => {
    let clock = 1000;
    const vm = new ConsoleViewModel(api, () => clock);
    expect(vm.pose).toBeNull();
    expect(vm.isStale()).toBe(true);
    vm.handleEvent({ event: "pose", data: { t_ms: 1, angles: { "index.flex1": 5 } } });
    expect(vm.pose).toEqual({ "index.flex1": 5 });
    expect(vm.isStale()).toBe(false);
    clock += 2001;
    expect(vm.isStale()).toBe(true);
    clock += 10;
    vm.handleEvent({ event: "pose", data: { t_ms: 2, angles: { "index.flex1": 6 } } });
    expect(vm.isStale()).toBe(false);
  });

  it("keeps a bounded sign-event feed", () => {
    const vm = new ConsoleViewModel(api, () => 0);
    for (let i = 0; i < 200; i++) {
      vm.handleEvent({
        event: "sign",
        data: { kind: "begin", letter: "A", hand: "right", t_ms: i },
      });
    }
    expect(vm.events.length).toBeLessThanOrEqual(80);
    expect(vm.events[vm.events.length - 1].tMs).toBe(199);
  });

  it("rejects invalid quiz guesses before any network call", async () => {
    const vm = new ConsoleViewModel(api, () => 0);
    await expect(vm.answer("!!", "right")).rejects.toThrow(/not a letter/);
    expect(vm.lastError).toMatch(/not a letter/);
  });
});
