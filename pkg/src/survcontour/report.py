"""Self-contained HTML report: the JSON payloads embedded verbatim plus a
small canvas renderer.  The numbers shown are exactly the payload values;
no probability is recomputed here."""
from __future__ import annotations

from . import jsonio

_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Survival contour report</title>
<style>
body {{ font-family: system-ui, sans-serif; margin: 2rem; color: #222; }}
h1 {{ font-size: 1.4rem; }}
h2 {{ font-size: 1.1rem; margin-top: 2rem; }}
canvas {{ border: 1px solid #ccc; }}
.row {{ display: flex; gap: 1rem; align-items: flex-start; flex-wrap: wrap; }}
table {{ border-collapse: collapse; font-size: 0.9rem; }}
td, th {{ border: 1px solid #ddd; padding: 0.25rem 0.5rem; text-align: right; }}
#readout {{ font-variant-numeric: tabular-nums; margin-top: 0.5rem; }}
</style>
</head>
<body>
<h1>Survival contour report</h1>
<div id="meta"></div>
<h2>Contour</h2>
<div class="row">
  <div><canvas id="contour" width="640" height="420"></canvas>
  <div id="readout">hover for values</div></div>
  <canvas id="hist" width="160" height="420"></canvas>
</div>
<h2>Quantile curves</h2>
<canvas id="curves" width="640" height="320"></canvas>
<h2>Metrics</h2>
<div id="metrics"></div>
<script type="application/json" id="payload-contour">{contour}</script>
<script type="application/json" id="payload-quantiles">{quantiles}</script>
<script type="application/json" id="payload-metrics">{metrics}</script>
<script>
const surface = JSON.parse(document.getElementById("payload-contour").textContent);
const quantiles = JSON.parse(document.getElementById("payload-quantiles").textContent);
const metrics = JSON.parse(document.getElementById("payload-metrics").textContent);

function color(p) {{
  const v = Math.max(0, Math.min(1, p));
  const r = Math.round(255 * (1 - v));
  const g = Math.round(90 + 120 * v);
  const b = Math.round(255 * v);
  return `rgb(${{r}},${{g}},${{b}})`;
}}

function drawSurface(s) {{
  const canvas = document.getElementById("contour");
  const ctx = canvas.getContext("2d");
  const nt = s.time_grid.length, np_ = s.predictor_grid.length;
  const cw = canvas.width / nt, ch = canvas.height / np_;
  for (let r = 0; r < np_; r++) {{
    for (let c = 0; c < nt; c++) {{
      ctx.fillStyle = color(s.prob[r][c]);
      ctx.fillRect(c * cw, canvas.height - (r + 1) * ch, Math.ceil(cw), Math.ceil(ch));
    }}
  }}
  canvas.addEventListener("mousemove", (ev) => {{
    const rect = canvas.getBoundingClientRect();
    const c = Math.min(nt - 1, Math.max(0, Math.floor((ev.clientX - rect.left) / cw)));
    const r = Math.min(np_ - 1, Math.max(0,
      Math.floor((canvas.height - (ev.clientY - rect.top)) / ch)));
    document.getElementById("readout").textContent =
      `t=${{s.time_grid[c]}}  predictor=${{s.predictor_grid[r]}}  value=${{s.prob[r][c]}}`;
  }});
}}

function drawHistogram(s) {{
  const canvas = document.getElementById("hist");
  const ctx = canvas.getContext("2d");
  const counts = s.histogram.counts;
  const max = Math.max(...counts, 1);
  const bh = canvas.height / counts.length;
  ctx.fillStyle = "#e67e22";
  counts.forEach((n, i) => {{
    const w = (n / max) * (canvas.width - 4);
    ctx.fillRect(0, canvas.height - (i + 1) * bh, w, Math.max(1, bh - 1));
  }});
}}

function drawCurves(q) {{
  const canvas = document.getElementById("curves");
  const ctx = canvas.getContext("2d");
  const tmax = q.time_grid[q.time_grid.length - 1] || 1;
  q.curves.forEach((curve, i) => {{
    ctx.beginPath();
    ctx.strokeStyle = `hsl(${{i * 60}}, 70%, 45%)`;
    curve.forEach((v, k) => {{
      const x = (q.time_grid[k] / tmax) * canvas.width;
      const y = canvas.height * (1 - v);
      if (k === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    }});
    ctx.stroke();
  }});
}}

document.getElementById("meta").textContent =
  `outcome: ${{surface.outcome_kind}} | predictor: ${{surface.flags.predictor ?? ""}}`;
const mdiv = document.getElementById("metrics");
mdiv.innerHTML = `<table><tr><th>C-index</th><th>pairs</th><th>IBS</th><th>window</th></tr>` +
  `<tr><td>${{metrics.c_index}}</td><td>${{metrics.comparable_pairs}}</td>` +
  `<td>${{metrics.integrated_brier ?? "n/a"}}</td>` +
  `<td>${{metrics.window ? metrics.window.join(" - ") : "n/a"}}</td></tr></table>`;
drawSurface(surface.panels ? surface.panels[0].surface : surface);
drawHistogram(surface.panels ? surface.panels[0].surface : surface);
drawCurves(quantiles);
</script>
</body>
</html>
"""


def render_report(contour_json: str, quantiles_json: str, metrics_json: str) -> str:
    """Assemble the static report page around the given payload strings."""
    for name, payload in (
        ("contour", contour_json),
        ("quantiles", quantiles_json),
        ("metrics", metrics_json),
    ):
        jsonio.loads(payload)  # refuse to embed anything that is not JSON
    return _TEMPLATE.format(
        contour=contour_json, quantiles=quantiles_json, metrics=metrics_json
    )
