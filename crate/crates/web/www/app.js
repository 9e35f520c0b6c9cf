import init, { heatmap, score, fit } from "./pkg/phonerr_web.js";

const $ = (id) => document.getElementById(id);

function shade(v) {
  const c = Math.round(255 * (1 - v));
  return `rgb(${c},${c},255)`;
}

function drawHeatmap() {
  const { symbols, values } = JSON.parse(heatmap());
  const n = symbols.length;
  const canvas = $("heat");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / n;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      ctx.fillStyle = shade(values[i * n + j]);
      ctx.fillRect(j * cell, i * cell, cell, cell);
    }
  }
  canvas.addEventListener("mousemove", (e) => {
    const r = canvas.getBoundingClientRect();
    const i = Math.floor((e.clientY - r.top) / cell);
    const j = Math.floor((e.clientX - r.left) / cell);
    if (i < 0 || j < 0 || i >= n || j >= n) return;
    $("heat-info").textContent = `S(${symbols[i]}, ${symbols[j]}) = ${values[i * n + j].toFixed(4)}`;
  });
}

function runScore() {
  const out = $("score-out");
  try {
    const { per, wper, ops } = JSON.parse(score($("ref").value, $("hyp").value));
    const cells = ops
      .map((o) => `<td class="${o.op}">${o.ref ?? "–"}<br>${o.hyp ?? "–"}<br><small>${o.op}</small></td>`)
      .join("");
    out.innerHTML = `PER ${per.toFixed(4)} &nbsp; WPER ${wper.toFixed(4)}<table class="ops"><tr>${cells}</tr></table>`;
  } catch (e) {
    out.innerHTML = `<span class="err">${e.message ?? e}</span>`;
  }
}

function drawCurve(history) {
  const ctx = $("curve").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  const max = Math.max(...history);
  const min = Math.min(...history);
  ctx.beginPath();
  history.forEach((v, k) => {
    const x = (k / Math.max(1, history.length - 1)) * (w - 10) + 5;
    const y = h - 5 - ((v - min) / (max - min || 1)) * (h - 10);
    k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.strokeStyle = "#2a5db0";
  ctx.stroke();
  ctx.fillText(`loss ${max.toFixed(2)} → ${history[history.length - 1].toFixed(3)}`, 8, 12);
}

function drawPosteriors(rows) {
  const ctx = $("post").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  const cw = w / rows.length;
  const ch = h / rows[0].length;
  rows.forEach((row, t) =>
    row.forEach((p, k) => {
      ctx.fillStyle = shade(p);
      ctx.fillRect(t * cw, k * ch, cw, ch);
    }),
  );
}

function runFit() {
  const out = $("fit-out");
  try {
    const r = JSON.parse(fit($("target").value, +$("frames").value, +$("steps").value, $("soft").checked));
    drawCurve(r.history);
    drawPosteriors(r.posteriors);
    out.textContent = `decoded: ${r.decoded.join(" ")}  (ctc ${r.ctc_part.toFixed(4)}, map ${r.map_part.toFixed(4)})`;
  } catch (e) {
    out.innerHTML = `<span class="err">${e.message ?? e}</span>`;
  }
}

await init();
drawHeatmap();
runScore();
$("score-btn").addEventListener("click", runScore);
$("fit-btn").addEventListener("click", runFit);
