import init, { oscillationTrace, separationCurve, boundComparison } from "./pkg/adaptive_ogd_wasm.js";

const COLORS = ["#d62728", "#1f77b4", "#ff7f0e", "#2ca02c"];

// series: [{ label, xs, ys, dash }]
function plot(canvas, series, { logX = false, logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 150, T = 15, B = 35;
  ctx.clearRect(0, 0, W, H);
  const tx = logX ? Math.log10 : (v) => v;
  const ty = logY ? Math.log10 : (v) => v;
  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x0 === x1) x1 = x0 + 1;
  if (y0 === y1) y1 = y0 + 1;
  const px = (x) => L + ((x - x0) / (x1 - x0)) * (W - L - R);
  const py = (y) => H - B - ((y - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  const fmt = (v, log) => (log ? "1e" + v.toFixed(1) : Number(v.toPrecision(3)).toString());
  for (let k = 0; k <= 4; k++) {
    const xv = x0 + ((x1 - x0) * k) / 4, yv = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(fmt(xv, logX), px(xv) - 15, H - B + 15);
    ctx.fillText(fmt(yv, logY), 5, py(yv) + 4);
  }
  ctx.fillText(xLabel, W - R - 80, H - 5);
  ctx.fillText(yLabel, L + 5, T + 12);

  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.setLineDash(s.dash ? [6, 4] : []);
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let started = false;
    s.xs.forEach((x, i) => {
      const a = tx(x), b = ty(s.ys[i]);
      if (!isFinite(a) || !isFinite(b)) return;
      started ? ctx.lineTo(px(a), py(b)) : ctx.moveTo(px(a), py(b));
      started = true;
    });
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = COLORS[k % COLORS.length];
    ctx.fillText(s.label, W - R + 10, T + 15 + 18 * k);
  });
}

const num = (id) => Number(document.getElementById(id).value);
const out = (id, text, error = false) => {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = error ? "out error" : "out";
};

function guarded(outId, f) {
  return () => {
    try {
      f();
    } catch (e) {
      out(outId, String(e), true);
    }
  };
}

function runOscillation() {
  const traces = JSON.parse(oscillationTrace(num("osc-eta"), num("osc-rounds"), num("osc-eps")));
  const xs = traces[0].points.map((_, i) => i + 1);
  plot(document.getElementById("osc-points"), traces.map((t) => ({ label: t.label, xs, ys: t.points })), {
    xLabel: "round t",
    yLabel: "x_t",
  });
  plot(document.getElementById("osc-loss"), traces.map((t) => ({ label: t.label, xs, ys: t.loss })), {
    xLabel: "round t",
    yLabel: "cumulative loss",
  });
  out("osc-out", traces.map((t) => `${t.label}: total loss ${t.loss[t.loss.length - 1].toFixed(4)}`).join("\n"));
}

function runSeparation() {
  const t0s = document.getElementById("sep-t0").value.split(",").map((s) => parseInt(s.trim(), 10)).filter((v) => v >= 8);
  const res = JSON.parse(separationCurve(Uint32Array.from(t0s), 0.01));
  const xs = res.points.map((p) => p.rounds);
  plot(
    document.getElementById("sep-plot"),
    [
      { label: "best fixed rate", xs, ys: res.points.map((p) => p.global) },
      { label: "per-coordinate", xs, ys: res.points.map((p) => p.per_coord) },
    ],
    { logX: true, logY: true, xLabel: "T", yLabel: "regret" },
  );
  const slope = (s) => (s === null ? "n/a (need 3 points)" : s.toFixed(3));
  out(
    "sep-out",
    res.points.map((p) => `T=${p.rounds}  eta*=${p.best_eta.toPrecision(3)}  global=${p.global.toFixed(2)}  per-coord=${p.per_coord.toFixed(2)}`).join("\n") +
      `\nslope: global ${slope(res.slope_global)}, per-coord ${slope(res.slope_per_coord)}`,
  );
}

function runBounds() {
  const res = JSON.parse(boundComparison(num("b-seed"), num("b-dim"), num("b-rounds"), num("b-skew")));
  const xs = res.rounds;
  plot(
    document.getElementById("b-plot"),
    [
      { label: "global regret", xs, ys: res.regret_global },
      { label: "per-coord regret", xs, ys: res.regret_per_coord },
      { label: "global bound", xs, ys: res.bound_global, dash: true },
      { label: "per-coord bound", xs, ys: res.bound_per_coord, dash: true },
    ],
    { xLabel: "round t", yLabel: "regret" },
  );
  const k = xs.length - 1;
  out(
    "b-out",
    `T=${xs[k]}: global ${res.regret_global[k].toFixed(2)} <= ${res.bound_global[k].toFixed(2)}, ` +
      `per-coord ${res.regret_per_coord[k].toFixed(2)} <= ${res.bound_per_coord[k].toFixed(2)}`,
  );
}

await init();
for (const [button, outId, f] of [
  ["osc-run", "osc-out", runOscillation],
  ["sep-run", "sep-out", runSeparation],
  ["b-run", "b-out", runBounds],
]) {
  const run = guarded(outId, f);
  document.getElementById(button).addEventListener("click", run);
  run();
}
