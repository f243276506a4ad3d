/** Client-side state: reconstructed costmap, latest frame, parameter form.
 *
 * Invariants enforced here rather than in the DOM layer:
 *  - rendered frame sequence is monotone (stale frames are dropped),
 *  - form values are always clamped into their descriptor range,
 *  - a parameter is locked while its patch is in flight and reverts if the
 *    server rejects the patch.
 */

import { applyFrame, StateFrame } from "./wire.js";

export interface ParamDescriptor {
  name: string;
  type: string;
  min: number | null;
  max: number | null;
  default: unknown;
  doc: string;
  hot: boolean;
  value: unknown;
}

export type ConnectionStatus = "connecting" | "live" | "closed" | "error";

interface FormEntry {
  descriptor: ParamDescriptor;
  value: unknown;
  pending: boolean;
  lastAcked: unknown;
}

export class ViewModel {
  seq = -1;
  cells: number[] | null = null;
  frame: StateFrame | null = null;
  status: ConnectionStatus = "connecting";
  revision = 0;
  banner: string | null = null;
  private form = new Map<string, FormEntry>();

  loadDescriptors(revision: number, descriptors: ParamDescriptor[]): void {
    this.revision = revision;
    this.form.clear();
    for (const d of descriptors) {
      this.form.set(d.name, { descriptor: d, value: d.value, pending: false, lastAcked: d.value });
    }
  }

  /** Returns true when the frame advanced the view (stale frames: false). */
  ingest(frame: StateFrame): boolean {
    if (frame.seq <= this.seq) return false;
    this.cells = applyFrame(frame.costmap, this.cells);
    this.seq = frame.seq;
    this.frame = frame;
    if (frame.param_revision > this.revision) this.revision = frame.param_revision;
    return true;
  }

  entry(name: string): FormEntry {
    const e = this.form.get(name);
    if (!e) throw new Error(`unknown parameter ${name}`);
    return e;
  }

  names(): string[] {
    return [...this.form.keys()];
  }

  /** Clamp a numeric edit into the descriptor range; returns the value the
   * form will actually hold. */
  edit(name: string, value: number): number {
    const e = this.entry(name);
    if (e.pending) return e.value as number;
    let v = value;
    const { min, max } = e.descriptor;
    if (min !== null && v < min) v = min;
    if (max !== null && v > max) v = max;
    e.value = v;
    return v;
  }

  /** Mark a patch as sent; the control stays locked until ack/reject. */
  beginPatch(name: string): void {
    this.entry(name).pending = true;
  }

  ackPatch(name: string, revision: number): void {
    const e = this.entry(name);
    e.pending = false;
    e.lastAcked = e.value;
    this.revision = Math.max(this.revision, revision);
    this.banner = null;
  }

  rejectPatch(name: string, diagnostic: string): void {
    const e = this.entry(name);
    e.pending = false;
    e.value = e.lastAcked;
    this.banner = diagnostic;
  }

  decodeError(detail: string): void {
    this.banner = `frame decode failed: ${detail}`;
  }

  /** Canvas pixel -> world meters using the latest frame's geometry. */
  canvasToWorld(px: number, py: number, scale: number): [number, number] | null {
    const cm = this.frame?.costmap;
    if (!cm) return null;
    const x = cm.origin[0] + (px / scale) * cm.resolution;
    const y = cm.origin[1] + ((cm.height - py / scale) * cm.resolution);
    return [x, y];
  }
}
