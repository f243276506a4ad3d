/** Pure rendering: a frame plus reconstructed cells map to a deterministic
 * sequence of draw operations on a minimal 2D-context interface.  The real
 * app hands in a CanvasRenderingContext2D; tests hand in a recorder. */

import { cssColor, costColor, fanColor } from "./colormap.js";
import { StateFrame } from "./wire.js";

export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
}

/** World meters -> canvas pixels (y axis flipped so +y is up). */
function mapper(frame: StateFrame, scale: number) {
  const cm = frame.costmap;
  return (wx: number, wy: number): [number, number] => [
    ((wx - cm.origin[0]) / cm.resolution) * scale,
    (cm.height - (wy - cm.origin[1]) / cm.resolution) * scale,
  ];
}

function drawCells(ctx: Draw2D, frame: StateFrame, cells: number[], scale: number): void {
  const { width, height } = frame.costmap;
  for (let iy = 0; iy < height; iy++) {
    for (let ix = 0; ix < width; ix++) {
      ctx.fillStyle = cssColor(costColor(cells[iy * width + ix]));
      ctx.fillRect(ix * scale, (height - 1 - iy) * scale, scale, scale);
    }
  }
}

function drawPath(ctx: Draw2D, frame: StateFrame, scale: number): void {
  if (frame.path.length < 2) return;
  const toPx = mapper(frame, scale);
  ctx.strokeStyle = "rgb(20,90,200)";
  ctx.lineWidth = 2;
  ctx.beginPath();
  const [x0, y0] = toPx(frame.path[0][0], frame.path[0][1]);
  ctx.moveTo(x0, y0);
  for (const [wx, wy] of frame.path.slice(1)) {
    const [x, y] = toPx(wx, wy);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function drawFan(ctx: Draw2D, frame: StateFrame, scale: number): void {
  const toPx = mapper(frame, scale);
  const [rx, ry] = toPx(frame.robot.x, frame.robot.y);
  const total = frame.candidates.length;
  frame.candidates.forEach((cand, rank) => {
    ctx.strokeStyle = fanColor(rank, total, cand.admissible);
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(rx, ry);
    const [ex, ey] = toPx(cand.end[0], cand.end[1]);
    ctx.lineTo(ex, ey);
    ctx.stroke();
  });
}

function drawRobot(ctx: Draw2D, frame: StateFrame, scale: number): void {
  const toPx = mapper(frame, scale);
  const { x, y, theta } = frame.robot;
  const r = 4 * scale * frame.costmap.resolution;
  const [cx, cy] = toPx(x, y);
  const [hx, hy] = toPx(x + Math.cos(theta) * 0.25, y + Math.sin(theta) * 0.25);
  ctx.strokeStyle = "rgb(0,0,0)";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cx - r, cy);
  ctx.lineTo(cx, cy - r);
  ctx.lineTo(cx + r, cy);
  ctx.lineTo(cx, cy + r);
  ctx.closePath();
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(hx, hy);
  ctx.stroke();
}

function drawGoal(ctx: Draw2D, frame: StateFrame, scale: number): void {
  const toPx = mapper(frame, scale);
  const [gx, gy] = toPx(frame.goal[0], frame.goal[1]);
  const r = 5;
  ctx.strokeStyle = "rgb(200,0,120)";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(gx - r, gy - r);
  ctx.lineTo(gx + r, gy + r);
  ctx.moveTo(gx - r, gy + r);
  ctx.lineTo(gx + r, gy - r);
  ctx.stroke();
}

export function renderFrame(
  ctx: Draw2D,
  frame: StateFrame,
  cells: number[],
  scale: number
): void {
  drawCells(ctx, frame, cells, scale);
  drawPath(ctx, frame, scale);
  drawFan(ctx, frame, scale);
  drawGoal(ctx, frame, scale);
  drawRobot(ctx, frame, scale);
}
