/** Magnitude comparison chart.
 *
 * Series are decimated to at most 2,000 points with min/max binning before
 * they hit the canvas, so a long recording still shows its envelope while
 * the drawing stays light. Decimation is display-only; the numbers shown
 * in the table come straight from the server.
 */

export interface Series {
  label: string;
  sampleRateHz: number;
  values: number[];
  color: string;
}

export const MAX_POINTS = 2000;

export interface ChartPoint {
  t: number;
  v: number;
}

/**
 * Min/max binning. Each bin contributes its minimum and maximum sample at
 * their true times (earlier extreme first), so spikes survive decimation
 * and the output never exceeds `maxPoints`. Series already within budget
 * pass through unchanged.
 */
export function decimate(
  values: number[],
  sampleRateHz: number,
  maxPoints: number = MAX_POINTS,
): ChartPoint[] {
  const n = values.length;
  const dt = 1 / sampleRateHz;
  if (n <= maxPoints) {
    return values.map((v, i) => ({ t: i * dt, v }));
  }
  const bins = Math.max(1, Math.floor(maxPoints / 2));
  const per = n / bins;
  const out: ChartPoint[] = [];
  for (let b = 0; b < bins; b++) {
    const start = Math.floor(b * per);
    const end = Math.min(n, Math.max(start + 1, Math.floor((b + 1) * per)));
    let loIdx = start;
    let hiIdx = start;
    for (let i = start + 1; i < end; i++) {
      if (values[i]! < values[loIdx]!) loIdx = i;
      if (values[i]! > values[hiIdx]!) hiIdx = i;
    }
    if (loIdx === hiIdx) {
      out.push({ t: loIdx * dt, v: values[loIdx]! });
    } else {
      const first = Math.min(loIdx, hiIdx);
      const second = Math.max(loIdx, hiIdx);
      out.push({ t: first * dt, v: values[first]! });
      out.push({ t: second * dt, v: values[second]! });
    }
  }
  return out;
}

interface Extent {
  tMax: number;
  yMin: number;
  yMax: number;
}

function extent(allSeries: ChartPoint[][]): Extent {
  let tMax = 0;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const series of allSeries) {
    for (const p of series) {
      if (p.t > tMax) tMax = p.t;
      if (p.v < yMin) yMin = p.v;
      if (p.v > yMax) yMax = p.v;
    }
  }
  if (!isFinite(yMin)) {
    yMin = 0;
    yMax = 1;
  }
  if (yMax - yMin < 1e-12) {
    yMax = yMin + 1;
  }
  return { tMax: tMax || 1, yMin, yMax };
}

const PAD = { left: 46, right: 10, top: 10, bottom: 24 };

/**
 * Draw the overlaid series on one canvas with shared time and magnitude
 * axes (seconds / m/s^2). The caller owns the legend markup.
 */
export function renderChart(canvas: HTMLCanvasElement, series: Series[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;

  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  const decimated = series.map((s) => decimate(s.values, s.sampleRateHz));
  const { tMax, yMin, yMax } = extent(decimated);

  const plotW = w - PAD.left - PAD.right;
  const plotH = h - PAD.top - PAD.bottom;
  const x = (t: number) => PAD.left + (t / tMax) * plotW;
  const y = (v: number) => PAD.top + (1 - (v - yMin) / (yMax - yMin)) * plotH;

  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(PAD.left, PAD.top, plotW, plotH);

  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  for (let k = 0; k <= 4; k++) {
    const t = (tMax * k) / 4;
    ctx.fillText(t.toFixed(1) + " s", x(t), h - 6);
  }
  ctx.textAlign = "right";
  for (let k = 0; k <= 4; k++) {
    const v = yMin + ((yMax - yMin) * k) / 4;
    ctx.fillText(v.toFixed(1), PAD.left - 4, y(v) + 4);
  }
  ctx.save();
  ctx.translate(10, PAD.top + plotH / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText("m/s²", 0, 0);
  ctx.restore();

  for (let i = 0; i < series.length; i++) {
    const s = series[i]!;
    const pts = decimated[i]!;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (let j = 0; j < pts.length; j++) {
      const p = pts[j]!;
      if (j === 0) ctx.moveTo(x(p.t), y(p.v));
      else ctx.lineTo(x(p.t), y(p.v));
    }
    ctx.stroke();
  }
}
