/** Cost-value colormap: 0 free is white, 1-252 a darkening gray ramp,
 * 253 inscribed-inflated orange, 254 lethal red, 255 unknown blue. */

export type Rgb = [number, number, number];

export function costColor(value: number): Rgb {
  if (value === 0) return [255, 255, 255];
  if (value === 253) return [255, 140, 0];
  if (value === 254) return [220, 30, 30];
  if (value === 255) return [80, 80, 220];
  const v = Math.min(Math.max(value, 1), 252);
  const level = Math.round(230 - ((v - 1) / 251) * 180);
  return [level, level, level];
}

export function cssColor([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

/** Trajectory fan color by cost rank: best is green, worst is red,
 * inadmissible candidates are drawn in a washed-out magenta. */
export function fanColor(rank: number, total: number, admissible: boolean): string {
  if (!admissible) return "rgba(200,80,200,0.35)";
  const t = total <= 1 ? 0 : rank / (total - 1);
  const r = Math.round(40 + 200 * t);
  const g = Math.round(200 - 170 * t);
  return `rgba(${r},${g},40,0.8)`;
}
