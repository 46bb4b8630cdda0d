/** 2-D skeletal hand: pure pose-to-geometry layout plus a canvas painter.
 *
 * Forearm roll and the two wrist axes transform the whole hand (rotation
 * plus foreshortening); each digit is a chain of three bending segments
 * fanned by its abduction angle.  Schematic, not anthropometric: it only
 * has to make the 26 handshapes tell apart.
 */

import { Pose } from "./viewmodel.js";

export type Point = [number, number];

export interface Stroke {
  kind: "palm" | "finger" | "thumb" | "wrist";
  points: Point[];
  width: number;
}

export interface HandLayout {
  strokes: Stroke[];
  size: number;
  stale: boolean;
}

const DEG = Math.PI / 180;

interface DigitSpec {
  name: string;
  baseX: number;
  baseY: number;
  lengths: [number, number, number];
  neutralAbd: number;
  abdRange: number;
  fanDeg: number;
}

const FINGERS: DigitSpec[] = [
  { name: "index", baseX: -30, baseY: 80, lengths: [34, 26, 18], neutralAbd: 50, abdRange: 100, fanDeg: 22 },
  { name: "middle", baseX: -10, baseY: 84, lengths: [38, 28, 20], neutralAbd: 22.5, abdRange: 45, fanDeg: 12 },
  { name: "ring", baseX: 10, baseY: 82, lengths: [36, 27, 19], neutralAbd: 22.5, abdRange: 45, fanDeg: 12 },
  { name: "pinky", baseX: 30, baseY: 76, lengths: [28, 21, 15], neutralAbd: 50, abdRange: 100, fanDeg: 25 },
];

export const REQUIRED_JOINTS: string[] = [
  ...["thumb.flex1", "thumb.flex2", "thumb.flex3", "thumb.abd", "thumb.pronsup"],
  ...FINGERS.flatMap((f) => ["flex1", "flex2", "flex3", "abd"].map((a) => `${f.name}.${a}`)),
  "wrist.radial", "wrist.flexext", "forearm.pronsup",
];

function need(pose: Pose, joint: string): number {
  const value = pose[joint];
  if (value === undefined) throw new Error(`pose missing ${joint}`);
  return value;
}

/** Three-segment chain with per-joint bends; flexion curls toward the palm. */
export function digitChain(
  origin: Point,
  baseAngleDeg: number,
  lengths: readonly number[],
  bendsDeg: readonly number[],
  curlSign: 1 | -1,
): Point[] {
  const points: Point[] = [origin];
  let angle = baseAngleDeg;
  let [x, y] = origin;
  for (let i = 0; i < lengths.length; i++) {
    angle -= curlSign * bendsDeg[i] * 0.55;
    x += Math.cos(angle * DEG) * lengths[i];
    y += Math.sin(angle * DEG) * lengths[i];
    points.push([x, y]);
  }
  return points;
}

function transform(points: Point[], rotateDeg: number, scaleX: number,
                   scaleY: number): Point[] {
  const cos = Math.cos(rotateDeg * DEG);
  const sin = Math.sin(rotateDeg * DEG);
  return points.map(([x, y]) => {
    const sx = x * scaleX;
    const sy = y * scaleY;
    return [sx * cos - sy * sin, sx * sin + sy * cos];
  });
}

export function layoutHand(pose: Pose, size = 320, stale = false): HandLayout {
  for (const joint of REQUIRED_JOINTS) need(pose, joint);

  // base transforms from the wrist/forearm axes
  const radial = need(pose, "wrist.radial") - 72.5;      // +- 72.5 deg
  const flexExt = need(pose, "wrist.flexext") - 95;      // +- 95 deg
  const roll = need(pose, "forearm.pronsup") - 135;      // +- 135 deg
  const rotate = radial * 0.5;
  const scaleX = clampMagnitude(Math.cos(roll * DEG), 0.25);
  const scaleY = 0.45 + 0.55 * Math.cos(clamp(flexExt, -85, 85) * DEG);

  const local: Stroke[] = [];

  // palm outline: wrist corners up to the knuckle line
  local.push({
    kind: "palm",
    width: 3,
    points: [
      [-34, 0], [-38, 62], [-30, 80], [-10, 84], [10, 82], [30, 76],
      [36, 58], [34, 0], [-34, 0],
    ],
  });

  for (const f of FINGERS) {
    const splay = ((need(pose, `${f.name}.abd`) - f.neutralAbd) / f.abdRange) * 2 * f.fanDeg;
    const chain = digitChain(
      [f.baseX, f.baseY],
      90 - splay,
      f.lengths,
      [need(pose, `${f.name}.flex1`), need(pose, `${f.name}.flex2`),
       need(pose, `${f.name}.flex3`)],
      1,
    );
    local.push({ kind: "finger", width: 6, points: chain });
  }

  // thumb: abduction swings the whole column from across-the-palm to wide out
  const thumbAbd = need(pose, "thumb.abd");
  const thumbSwing = 205 - (thumbAbd / 195) * 115; // 205 deg (across) .. 90+ (out)
  const thumbRoll = (need(pose, "thumb.pronsup") - 90) * 0.15;
  const thumb = digitChain(
    [-36, 26],
    thumbSwing + thumbRoll - 90,
    [30, 24, 18],
    [need(pose, "thumb.flex1"), need(pose, "thumb.flex2"), need(pose, "thumb.flex3")],
    -1,
  );
  local.push({ kind: "thumb", width: 7, points: thumb });

  // forearm stub below the wrist
  local.push({ kind: "wrist", width: 10, points: [[0, 0], [0, -40]] });

  const transformed = local.map((stroke) => ({
    ...stroke,
    points: transform(stroke.points, rotate, scaleX, scaleY),
  }));

  // map into canvas coordinates: center horizontally, wrist near the bottom
  const cx = size / 2;
  const cy = size * 0.78;
  const scale = size / 320;
  const strokes = transformed.map((stroke) => ({
    ...stroke,
    points: stroke.points.map(([x, y]) =>
      [cx + x * scale, cy - y * scale] as Point),
  }));
  return { strokes, size, stale };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}

function clampMagnitude(v: number, minMag: number): number {
  if (Math.abs(v) >= minMag) return v;
  return v < 0 ? -minMag : minMag;
}

export function fingertip(layout: HandLayout, kind: "finger" | "thumb",
                          index = 0): Point {
  const strokes = layout.strokes.filter((s) => s.kind === kind);
  const points = strokes[index].points;
  return points[points.length - 1];
}

export function drawHand(ctx: CanvasRenderingContext2D, layout: HandLayout): void {
  ctx.clearRect(0, 0, layout.size, layout.size);
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  for (const stroke of layout.strokes) {
    ctx.beginPath();
    const [x0, y0] = stroke.points[0];
    ctx.moveTo(x0, y0);
    for (const [x, y] of stroke.points.slice(1)) ctx.lineTo(x, y);
    ctx.strokeStyle = layout.stale ? "#8a8a8a"
      : stroke.kind === "palm" ? "#4a6fa5"
      : stroke.kind === "wrist" ? "#37474f"
      : "#263238";
    ctx.lineWidth = stroke.width;
    if (stroke.kind === "palm") {
      ctx.fillStyle = layout.stale ? "#d5d5d5" : "#dbe7f5";
      ctx.fill();
    }
    ctx.stroke();
  }
  for (const stroke of layout.strokes) {
    if (stroke.kind === "finger" || stroke.kind === "thumb") {
      for (const [x, y] of stroke.points) {
        ctx.beginPath();
        ctx.arc(x, y, 2.5, 0, 2 * Math.PI);
        ctx.fillStyle = layout.stale ? "#8a8a8a" : "#00695c";
        ctx.fill();
      }
    }
  }
}
