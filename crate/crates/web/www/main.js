import init, { sample_attractor, pressure_curve, discontinuity_scan } from "./pkg/fdl_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function pairMatrices() {
  const lam = num("lambda"), delta = num("delta"), k = Math.round(num("k"));
  const a = [[lam, 0], [0, delta]];
  if (k === 0) return [a, [[lam, 0], [0, lam]]];
  const t = Math.PI / (2 * k), c = Math.cos(t), s = Math.sin(t);
  return [a, [[lam * c, -lam * s], [lam * s, lam * c]]];
}

function fail(target, e) {
  target.innerHTML = "";
  const span = document.createElement("span");
  span.className = "err";
  span.textContent = String(e);
  target.appendChild(span);
}

function drawAttractor() {
  const info = $("attractor-info");
  const canvas = $("attractor");
  const ctx = canvas.getContext("2d");
  const p = num("p");
  const request = {
    matrices: pairMatrices(),
    translations: [[0, 0], [1 - num("lambda"), 1 - num("lambda")]],
    p: [p, 1 - p],
    count: Math.round(num("count")),
    seed: Math.round(num("seed")),
  };
  let res;
  try {
    res = JSON.parse(sample_attractor(JSON.stringify(request)));
  } catch (e) {
    return fail(info, e);
  }
  const [x0, y0, x1, y1] = res.bounds;
  const span = Math.max(x1 - x0, y1 - y0) || 1;
  const w = canvas.width, h = canvas.height, pad = 10;
  const scale = (w - 2 * pad) / span;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, w, h);
  ctx.fillStyle = "rgba(20, 60, 160, 0.35)";
  const pts = res.points;
  for (let i = 0; i < pts.length; i += 2) {
    ctx.fillRect(pad + (pts[i] - x0) * scale, h - pad - (pts[i + 1] - y0) * scale, 1, 1);
  }
  info.textContent = res.d2 === null
    ? `${pts.length / 2} points`
    : `${pts.length / 2} points, correlation dimension estimate ${res.d2.toFixed(3)}`;
}

function drawCurve() {
  const info = $("curve-info");
  const canvas = $("pressure");
  const ctx = canvas.getContext("2d");
  let pts;
  try {
    pts = JSON.parse(pressure_curve(num("lambda"), num("delta"), Math.round(num("k")), num("p"), num("q"),
      num("smin"), num("smax"), 40, Math.round(num("depth"))));
  } catch (e) {
    return fail(info, e);
  }
  const w = canvas.width, h = canvas.height, pad = 30;
  const ys = pts.flatMap((p) => [p.lower, p.upper]).concat([0]);
  const ymin = Math.min(...ys), ymax = Math.max(...ys);
  const sx = (s) => pad + (s - pts[0].s) / (pts[pts.length - 1].s - pts[0].s) * (w - 2 * pad);
  const sy = (y) => h - pad - (y - ymin) / (ymax - ymin || 1) * (h - 2 * pad);
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, w, h);
  ctx.fillStyle = "rgba(160, 40, 40, 0.2)";
  ctx.beginPath();
  pts.forEach((p, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, sx(p.s), sy(p.upper)));
  [...pts].reverse().forEach((p) => ctx.lineTo(sx(p.s), sy(p.lower)));
  ctx.closePath();
  ctx.fill();
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(w - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`s = ${pts[0].s}`, pad, h - 10);
  ctx.fillText(`s = ${pts[pts.length - 1].s}`, w - pad - 50, h - 10);
  ctx.fillText(ymax.toFixed(2), 2, pad);
  ctx.fillText(ymin.toFixed(2), 2, h - pad);
  const crossing = pts.find((p) => p.lower > 0);
  info.textContent = crossing
    ? `pressure certified positive from s = ${crossing.s.toFixed(3)}`
    : "pressure not certified positive on this range";
}

function runScan() {
  const out = $("scan-out");
  const ks = $("ks").value.split(/[\s,]+/).filter(Boolean).map(Number);
  let res;
  try {
    res = JSON.parse(discontinuity_scan(num("lambda"), num("delta"), num("p"), num("q"), JSON.stringify(ks), 1e-4));
  } catch (e) {
    return fail(out, e);
  }
  const d = res.diagonal;
  const rows = res.rows.map((r) =>
    `<tr><td>${r.k}</td><td>${r.matrix_distance.toFixed(6)}</td><td>${r.rq_upper_perturbed.toFixed(7)}</td>` +
    `<td>${r.gap.toFixed(4)}</td></tr>`).join("");
  out.innerHTML =
    `<p>commuting pair: [${d.lower.toFixed(7)}, ${d.upper.toFixed(7)}]` +
    (res.gaps_positive ? "; every gap is certified positive" : "; some gaps are not certified") + "</p>" +
    "<table><tr><th>k</th><th>distance</th><th>upper bound</th><th>gap</th></tr>" + rows + "</table>";
}

await init();
$("draw").addEventListener("click", drawAttractor);
$("curve").addEventListener("click", drawCurve);
$("scan").addEventListener("click", runScan);
drawAttractor();
drawCurve();
