import init, { simulate, duration_histograms, region_frequencies } from "./pkg/hawkes_cluster_web.js";

const field = (sec, name) => sec.querySelector(`[name=${name}]`).value;
const num = (sec, name) => Number(field(sec, name));

function report(sec, text, isError = false) {
  const out = sec.querySelector(".out");
  out.textContent = text;
  out.className = isError ? "out err" : "out";
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
}

function drawCluster(sec) {
  const canvas = sec.querySelector("canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  const view = simulate(field(sec, "family"), num(sec, "p1"), num(sec, "p2"), num(sec, "cond"), BigInt(num(sec, "seed")), 600);
  const grid = view.grid, lam = view.intensity, epochs = view.epochs;
  const tMax = grid[grid.length - 1] || 1;
  const lMax = Math.max(...lam, 1e-12);
  const x = (t) => pad + (t / tMax) * (w - 1.5 * pad);
  const y = (v) => h - pad - (v / lMax) * (h - 1.5 * pad);
  axes(ctx, w, h, pad);
  ctx.strokeStyle = "#1f5fa8";
  ctx.beginPath();
  grid.forEach((t, i) => (i ? ctx.lineTo(x(t), y(lam[i])) : ctx.moveTo(x(t), y(lam[i]))));
  ctx.stroke();
  ctx.fillStyle = "#c0392b";
  for (const a of epochs) ctx.fillRect(x(a) - 1, h - pad + 2, 2, 8);
  report(sec, `N = ${view.size}, duration τ = ${view.duration.toPrecision(6)}, peak intensity ${lMax.toPrecision(4)}`);
}

function drawDurations(sec) {
  const canvas = sec.querySelector("canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  const cmp = duration_histograms(num(sec, "alpha"), num(sec, "beta"), num(sec, "cond"), num(sec, "reps"), 40, BigInt(num(sec, "seed")));
  const a = cmp.closed_form, b = cmp.simulated, edges = cmp.edges;
  const top = Math.max(...a, ...b, 1);
  const bw = (w - 1.5 * pad) / a.length;
  axes(ctx, w, h, pad);
  a.forEach((c, i) => {
    const hb = (c / top) * (h - 1.5 * pad);
    ctx.fillStyle = "rgba(31,95,168,0.55)";
    ctx.fillRect(pad + i * bw, h - pad - hb, bw / 2, hb);
    const hs = (b[i] / top) * (h - 1.5 * pad);
    ctx.fillStyle = "rgba(192,57,43,0.55)";
    ctx.fillRect(pad + i * bw + bw / 2, h - pad - hs, bw / 2, hs);
  });
  report(sec, `blue: exponential-sum sampler, red: parking simulator; τ up to ${edges[edges.length - 1].toPrecision(4)}; KS = ${cmp.ks.toFixed(4)}`);
}

function drawRegions(sec) {
  const canvas = sec.querySelector("canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  const k = num(sec, "k"), rho = num(sec, "rho");
  const t = region_frequencies(k, rho, num(sec, "samples"), BigInt(num(sec, "seed")));
  const labels = t.labels, obs = t.observed, exact = t.exact;
  axes(ctx, w, h, pad);
  if (k === 2) {
    // scatter inside the triangle-like polytope 0 < x1 < x2, x1 < ρ, x2 < 2ρ
    const pts = t.points, s = (h - 1.5 * pad) / (2 * rho);
    ctx.fillStyle = "rgba(31,95,168,0.4)";
    for (let i = 0; i < pts.length; i += 2) ctx.fillRect(pad + pts[i] * s, h - pad - pts[i + 1] * s, 2, 2);
    ctx.strokeStyle = "#c0392b";
    ctx.beginPath();
    ctx.moveTo(pad, h - pad - rho * s);
    ctx.lineTo(pad + rho * s, h - pad - rho * s);
    ctx.stroke();
  } else {
    const bw = (w - 1.5 * pad) / labels.length;
    const top = Math.max(...obs, ...exact);
    ctx.font = "11px monospace";
    labels.forEach((lab, i) => {
      const hb = (obs[i] / top) * (h - 2.5 * pad);
      ctx.fillStyle = "rgba(31,95,168,0.6)";
      ctx.fillRect(pad + i * bw + 2, h - pad - hb, bw - 4, hb);
      ctx.fillStyle = "#c0392b";
      ctx.fillRect(pad + i * bw + 2, h - pad - (exact[i] / top) * (h - 2.5 * pad) - 1, bw - 4, 2);
      if (labels.length <= 42) {
        ctx.save();
        ctx.translate(pad + i * bw + bw / 2, h - pad + 4);
        ctx.rotate(Math.PI / 2);
        ctx.fillStyle = "#222";
        ctx.fillText(lab, 0, 0);
        ctx.restore();
      }
    });
  }
  const worst = Math.max(...obs.map((o, i) => Math.abs(o - exact[i])));
  report(sec, `${labels.length} regions; largest |observed − exact| = ${worst.toExponential(2)}`);
}

const wire = (id, fn) => {
  const sec = document.getElementById(id);
  sec.querySelector("button").addEventListener("click", () => {
    try {
      fn(sec);
    } catch (e) {
      report(sec, String(e), true);
    }
  });
  return sec;
};

await init();
const sections = [wire("sim", drawCluster), wire("dur", drawDurations), wire("reg", drawRegions)];
sections.forEach((sec) => sec.querySelector("button").click());
