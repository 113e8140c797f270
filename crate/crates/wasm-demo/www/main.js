import init, { signInterpolant, smoothedIndicator, reconstruct } from "./pkg/tvsr_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const numbers = (s) => s.split(/[\s,]+/).filter(Boolean).map(Number);

function plot(canvas, series, { lo, hi, marks = [], zero = true }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const y = (v) => h - 10 - ((v - lo) / (hi - lo)) * (h - 20);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.setLineDash([4, 4]);
  for (const v of zero ? [lo, 0, hi] : [lo, hi]) {
    ctx.beginPath();
    ctx.moveTo(0, y(v));
    ctx.lineTo(w, y(v));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  for (const { values, color } of series) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    values.forEach((v, k) => {
      const x = (k / values.length) * w;
      k === 0 ? ctx.moveTo(x, y(v)) : ctx.lineTo(x, y(v));
    });
    ctx.stroke();
  }
  ctx.fillStyle = "#c00";
  for (const { t, v } of marks) {
    ctx.beginPath();
    ctx.arc(t * w, y(v), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function showError(el, e) {
  el.className = "stats err";
  el.textContent = String(e.message ?? e);
}

function interpolantPanel() {
  const stats = $("ip-stats");
  try {
    const points = numbers($("ip-points").value);
    const signs = Int8Array.from(numbers($("ip-signs").value));
    const g = signInterpolant(Float64Array.from(points), signs, Number($("ip-phi").value), 900);
    plot($("ip-canvas"), [{ values: g.values, color: "#1456a0" }], {
      lo: -1.2,
      hi: 1.2,
      marks: points.map((t, i) => ({ t: t - Math.floor(t), v: signs[i] })),
    });
    stats.className = "stats";
    stats.textContent =
      `dominance margin ${g.dominance.toFixed(4)}   bounds ${g.valid ? "hold" : "fail"}\n` +
      `R ${g.r.toExponential(3)}   kappa ${g.kappa.toExponential(3)}   eta ${g.eta.toExponential(3)}`;
    g.free();
  } catch (e) {
    showError(stats, e);
  }
}

function indicatorPanel() {
  const a = Number($("ci-a").value);
  const b = Number($("ci-b").value);
  const phi = Number($("ci-phi").value);
  const n = 900;
  const out = smoothedIndicator(a, b, phi, n);
  const exact = Array.from({ length: n }, (_, k) => {
    const t = k / n;
    return a <= b ? (t >= a && t < b ? 1 : 0) : t >= a || t < b ? 1 : 0;
  });
  plot($("ci-canvas"), [
    { values: exact, color: "#999" },
    { values: out.slice(0, n), color: "#1456a0" },
  ], { lo: -0.1, hi: 1.1 });
  $("ci-stats").textContent =
    `mean over the arc ${out[n].toFixed(4)}   guaranteed at least ${out[n + 1].toFixed(4)}`;
}

function paint(canvas, values, n, lo, hi) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  values.forEach((v, k) => {
    const g = Math.round(255 * Math.min(1, Math.max(0, (v - lo) / (hi - lo || 1))));
    img.data.set([g, g, g, 255], 4 * k);
  });
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function reconstructionPanel() {
  const stats = $("rc-stats");
  stats.className = "stats";
  stats.textContent = "solving...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = reconstruct(
        Number($("rc-n").value),
        Number($("rc-phi").value),
        Number($("rc-sep").value),
        BigInt($("rc-seed").value),
        Number($("rc-iters").value),
      );
      const ms = performance.now() - t0;
      const truth = r.truth;
      const recon = r.recon;
      const lo = Math.min(...truth);
      const hi = Math.max(...truth);
      paint($("rc-truth"), truth, r.n, lo, hi);
      paint($("rc-recon"), recon, r.n, lo, hi);
      const diff = recon.map((v, k) => Math.abs(v - truth[k]));
      paint($("rc-diff"), diff, r.n, 0, Math.max(1e-3, ...diff));
      stats.textContent =
        `separation ${r.delta.toFixed(3)}   l1 error ${r.l1.toExponential(3)}   iterations ${r.iterations}   ${ms.toFixed(0)} ms\n` +
        `TV truth ${r.tvTruth.toFixed(4)}   TV reconstruction ${r.tvRecon.toFixed(4)}`;
      r.free();
    } catch (e) {
      showError(stats, e);
    }
  }, 10);
}

await init();
for (const id of ["ip-points", "ip-signs", "ip-phi"]) $(id).addEventListener("input", interpolantPanel);
for (const id of ["ci-a", "ci-b", "ci-phi"]) $(id).addEventListener("input", indicatorPanel);
$("rc-run").addEventListener("click", reconstructionPanel);
interpolantPanel();
indicatorPanel();
