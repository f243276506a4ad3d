/** Wire codec for the /stream WebSocket and delta replay of costmaps.
 *
 * Each stream message is `<byte-length>:<json>` where the prefix counts the
 * UTF-8 bytes of the JSON document.  Costmaps arrive either as keyframes
 * (full `cells` dump) or as deltas (`[index, value]` pairs against the
 * previously reconstructed cells).
 */

export interface FrameCostmap {
  keyframe: boolean;
  origin: [number, number];
  resolution: number;
  width: number;
  height: number;
  cells?: number[];
  delta?: [number, number][];
}

export interface Candidate {
  vx: number;
  omega: number;
  total_cost: number;
  admissible: boolean;
  end: [number, number, number];
}

export interface StateFrame {
  seq: number;
  t: number;
  state: string;
  robot: { x: number; y: number; theta: number; vx: number; omega: number };
  goal: number[];
  cmd: { vx: number; vy: number; omega: number };
  path: [number, number][];
  candidates: Candidate[];
  costmap: FrameCostmap;
  events: { t: number; state: string; event: string; detail: string }[];
  param_revision: number;
}

const encoder = new TextEncoder();

export function encodeMessage(obj: unknown): string {
  const body = JSON.stringify(obj);
  return `${encoder.encode(body).length}:${body}`;
}

export function decodeMessage(text: string): StateFrame {
  const sep = text.indexOf(":");
  if (sep < 0) throw new Error("missing length prefix");
  const declared = Number(text.slice(0, sep));
  const body = text.slice(sep + 1);
  const actual = encoder.encode(body).length;
  if (!Number.isInteger(declared) || declared !== actual) {
    throw new Error(`length prefix ${declared} != body length ${actual}`);
  }
  return JSON.parse(body) as StateFrame;
}

/** Fold one frame's costmap into the reconstructed cell array. */
export function applyFrame(cm: FrameCostmap, cells: number[] | null): number[] {
  if (cm.keyframe) {
    if (!cm.cells) throw new Error("keyframe without cells");
    return cm.cells.slice();
  }
  if (cells === null) throw new Error("delta frame without a prior keyframe");
  const out = cells.slice();
  for (const [i, v] of cm.delta ?? []) {
    if (i < 0 || i >= out.length) throw new Error(`delta index ${i} out of range`);
    out[i] = v;
  }
  return out;
}
