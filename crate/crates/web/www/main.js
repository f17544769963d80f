import init, { pressureCurve, renderAttractor, furstenbergStrip } from "./pkg/moran_web.js";

const PRESETS = {
  "Golden mean shift on the dyadic pair": {
    dimension: 1,
    maps: [
      { type: "homothety", r: "1/2", a: "0" },
      { type: "homothety", r: "1/2", a: "1/2" },
    ],
    subshift: { alphabet: 2, forbidden: ["22"] },
    seed: { lo: "0", hi: "1" },
  },
  "Ratios 1/2 and 1/3": {
    dimension: 1,
    maps: [
      { type: "homothety", r: "1/2", a: "0" },
      { type: "homothety", r: "1/3", a: "2/3" },
    ],
    subshift: { alphabet: 2, forbidden: [] },
    seed: { lo: "0", hi: "1" },
  },
  "Three maps x/2, x/5 + 1/2, x/7 + 6/7": {
    dimension: 1,
    maps: [
      { type: "homothety", r: "1/2", a: "0" },
      { type: "homothety", r: "1/5", a: "1/2" },
      { type: "homothety", r: "1/7", a: "6/7" },
    ],
    subshift: { alphabet: 3, forbidden: [] },
    seed: { lo: "0", hi: "1" },
  },
  "Diagonal affine, disjoint projections": {
    dimension: 2,
    maps: [
      { type: "diag_affine", r: "1/3", s: "1/2", a: "1/10", b: "0" },
      { type: "diag_affine", r: "1/2", s: "1/3", a: "1/2", b: "2/3" },
    ],
    subshift: { alphabet: 2, forbidden: [] },
    seed: { lo: ["0", "0"], hi: ["1", "1"] },
  },
  "Diagonal affine, stacked": {
    dimension: 2,
    maps: [
      { type: "diag_affine", r: "1/3", s: "1/2", a: "0", b: "0" },
      { type: "diag_affine", r: "1/3", s: "1/2", a: "2/3", b: "0" },
    ],
    subshift: { alphabet: 2, forbidden: [] },
    seed: { lo: ["0", "0"], hi: ["1", "1"] },
  },
};

const $ = (id) => document.getElementById(id);

function specText() {
  return $("spec").value;
}

function fail(target, err) {
  target.innerHTML = "";
  const div = document.createElement("div");
  div.className = "error";
  div.textContent = String(err.message ?? err);
  target.appendChild(div);
}

function plotCurve(t, p, tStar) {
  const w = 800, h = 320, pad = 40;
  const pMin = Math.min(...p, 0), pMax = Math.max(...p, 0);
  const x = (v) => pad + ((v - t[0]) / (t[t.length - 1] - t[0])) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - pMin) / (pMax - pMin || 1)) * (h - 2 * pad);
  const points = t.map((tv, k) => `${x(tv).toFixed(2)},${y(p[k]).toFixed(2)}`).join(" ");
  const axis = `<line x1="${pad}" y1="${y(0)}" x2="${w - pad}" y2="${y(0)}" stroke="#999"/>`;
  const marker = tStar >= t[0] && tStar <= t[t.length - 1]
    ? `<line x1="${x(tStar)}" y1="${pad / 2}" x2="${x(tStar)}" y2="${h - pad / 2}" stroke="#c0392b" stroke-dasharray="4 3"/>
       <text x="${x(tStar) + 4}" y="${pad / 2 + 10}" font-size="12" fill="#c0392b">t* = ${tStar.toFixed(6)}</text>`
    : "";
  const labels = `<text x="${pad}" y="${h - 10}" font-size="11">t = ${t[0]}</text>
    <text x="${w - pad - 50}" y="${h - 10}" font-size="11">t = ${t[t.length - 1]}</text>
    <text x="4" y="${y(pMax) + 4}" font-size="11">${pMax.toFixed(2)}</text>
    <text x="4" y="${y(pMin) + 4}" font-size="11">${pMin.toFixed(2)}</text>`;
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${w}" height="${h}" viewBox="0 0 ${w} ${h}">
    <rect width="100%" height="100%" fill="white"/>${axis}
    <polyline points="${points}" fill="none" stroke="#1f4e79" stroke-width="2"/>${marker}${labels}</svg>`;
}

function runPressure() {
  try {
    const out = JSON.parse(pressureCurve(specText(), Number($("level").value), 80, Number($("tmax").value)));
    $("pressure-info").textContent = `t* = ${out.t_star} (${out.method})`;
    $("pressure").innerHTML = plotCurve(out.t, out.p, out.t_star);
  } catch (err) {
    $("pressure-info").textContent = "";
    fail($("pressure"), err);
  }
}

function runRender() {
  try {
    $("render").innerHTML = renderAttractor(specText(), Number($("depth").value), $("gaps").checked);
  } catch (err) {
    fail($("render"), err);
  }
}

function runStrip() {
  try {
    const out = JSON.parse(furstenbergStrip(Number($("fdepth").value), Number($("jmax").value)));
    $("strip").innerHTML = out.svg;
    const rows = out.rows
      .map((r) => `<tr><td>${r.j}</td><td>${r.m}</td><td>${r.n}</td><td>${r.distance}</td><td>${r.distance_approx.toFixed(6)}</td></tr>`)
      .join("");
    $("strip-table").innerHTML = `<tr><th>j</th><th>m</th><th>n</th><th>D(A_j, K)</th><th>≈</th></tr>${rows}`;
  } catch (err) {
    $("strip-table").innerHTML = "";
    fail($("strip"), err);
  }
}

function loadPreset(name) {
  $("spec").value = JSON.stringify(PRESETS[name], null, 2);
  $("spec-error").textContent = "";
  runPressure();
  runRender();
}

for (const [slider, label] of [["level", "level-value"], ["depth", "depth-value"], ["fdepth", "fdepth-value"]]) {
  $(slider).addEventListener("input", () => { $(label).textContent = $(slider).value; });
}

await init();
for (const name of Object.keys(PRESETS)) {
  const opt = document.createElement("option");
  opt.textContent = name;
  $("preset").appendChild(opt);
}
$("preset").addEventListener("change", (e) => loadPreset(e.target.value));
$("run-pressure").addEventListener("click", runPressure);
$("run-render").addEventListener("click", runRender);
$("run-strip").addEventListener("click", runStrip);
loadPreset(Object.keys(PRESETS)[0]);
runStrip();
