import init, { solve, inspect, gap_map } from "./pkg/famdiv_web.js";

const DEFAULT_ECONOMY = {
  goods: 2,
  endowment: [3, 3],
  families: [
    { id: "f", members: [
      { id: "h", utility: { kind: "cobb_douglas", weights: [0.2, 0.8] } },
      { id: "w", utility: { kind: "cobb_douglas", weights: [0.8, 0.2] } } ] },
    { id: "s", members: [
      { id: "s", utility: { kind: "cobb_douglas", weights: [0.6, 0.4] } } ] },
  ],
};
const COLORS = ["#1f5fbf", "#c2410c", "#6d28d9", "#0f766e", "#a16207"];

const canvas = document.getElementById("box");
const ctx = canvas.getContext("2d");
const economyInput = document.getElementById("economy");
const errorBox = document.getElementById("error");
const report = document.getElementById("report");
const gapSummary = document.getElementById("gap-summary");

let economy = DEFAULT_ECONOMY;
let first = [1.5, 1.5];
let gap = null;
let latest = null;

function fail(err) {
  errorBox.textContent = err instanceof Error ? err.message : String(err);
}

function readEconomy() {
  economy = JSON.parse(economyInput.value);
  if (economy.goods !== 2 || economy.families.length !== 2) {
    throw new Error("The box needs exactly two families and two goods.");
  }
}

function toCanvas([y, z]) {
  const [ey, ez] = economy.endowment;
  return [(y / ey) * canvas.width, canvas.height - (z / ez) * canvas.height];
}

function allocationDoc() {
  const [ey, ez] = economy.endowment;
  const bundles = {};
  bundles[economy.families[0].id] = first;
  bundles[economy.families[1].id] = [ey - first[0], ez - first[1]];
  return JSON.stringify({ bundles });
}

function drawGap() {
  if (!gap) return;
  const cell = canvas.width / (gap.n + 1);
  const max = Math.max(...gap.values, 1e-12);
  gap.values.forEach((v, k) => {
    const i = Math.floor(k / (gap.n + 1));
    const j = k % (gap.n + 1);
    const shade = Math.round(255 * (1 - Math.sqrt(v / max)));
    ctx.fillStyle = `rgb(255, ${shade}, ${shade})`;
    ctx.fillRect(i * cell, canvas.height - (j + 1) * cell, cell + 1, cell + 1);
  });
}

function drawCurve(points, flip, color) {
  const [ey, ez] = economy.endowment;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  points.forEach(([y, z], k) => {
    const [cx, cy] = toCanvas(flip ? [ey - y, ez - z] : [y, z]);
    if (k === 0) ctx.moveTo(cx, cy); else ctx.lineTo(cx, cy);
  });
  ctx.stroke();
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  drawGap();
  const [ey, ez] = economy.endowment;
  const [fx, fy] = toCanvas([ey / 2, ez / 2]);
  ctx.fillStyle = "#888";
  ctx.fillRect(fx - 2, fy - 2, 4, 4);
  if (latest) {
    let c = 0;
    latest.families.forEach((family, f) => {
      family.members.forEach((m) => {
        if (m.curve) drawCurve(m.curve, f === 1, COLORS[c++ % COLORS.length]);
      });
    });
  }
  const [px, py] = toCanvas(first);
  ctx.fillStyle = "#000";
  ctx.beginPath();
  ctx.arc(px, py, 4, 0, 2 * Math.PI);
  ctx.fill();
}

function yesNo(value) {
  return `<span class="${value ? "yes" : "no"}">${value ? "yes" : "no"}</span>`;
}

function fmt(v) {
  return v === null || v === undefined ? "–" : Number(v).toFixed(4);
}

function renderReport() {
  const rows = Object.entries(latest.verdicts).map(([name, v]) => {
    const note = v.witnesses && v.witnesses.length ? `envious: ${v.witnesses.join(", ")}`
      : v.reference ? `reference (${v.reference.map(fmt).join(", ")})` : "";
    return `<tr><td>${name}</td><td>${yesNo(v.holds)}</td><td>${note}</td></tr>`;
  });
  const p = latest.pareto;
  rows.push(`<tr><td>pareto</td><td>${p.verdict}</td><td>${p.mrs_gap !== undefined ? `MRS gap ${fmt(p.mrs_gap)}` : p.reason || ""}</td></tr>`);
  const members = latest.families.flatMap((family) =>
    family.members.map((m) => `<tr><td>${family.id}</td><td>${m.id}</td><td>${fmt(m.utility)}</td><td>${fmt(m.normalized)}</td><td>${family.mrs_range ? family.mrs_range.map(fmt).join(" – ") : "–"}</td></tr>`));
  report.innerHTML = `
    <p>First family: (${first.map(fmt).join(", ")}). Democratic no-envy fraction ${fmt(latest.democratic_fraction)}.</p>
    <table><tr><th>criterion</th><th>holds</th><th></th></tr>${rows.join("")}</table>
    <table><tr><th>family</th><th>member</th><th>utility</th><th>normalized</th><th>family MRS range</th></tr>${members.join("")}</table>`;
}

function refresh() {
  errorBox.textContent = "";
  try {
    readEconomy();
    latest = JSON.parse(inspect(economyInput.value, allocationDoc()));
    renderReport();
  } catch (err) {
    latest = null;
    report.innerHTML = "";
    fail(err);
  }
  draw();
}

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  const [ey, ez] = economy.endowment;
  first = [
    ((event.clientX - rect.left) / rect.width) * ey,
    (1 - (event.clientY - rect.top) / rect.height) * ez,
  ];
  refresh();
});

document.getElementById("solve").addEventListener("click", () => {
  errorBox.textContent = "";
  try {
    readEconomy();
    const method = document.getElementById("method").value;
    const out = JSON.parse(solve(economyInput.value, JSON.stringify({ method })));
    first = out.bundles[economy.families[0].id];
    refresh();
  } catch (err) {
    fail(err);
  }
});

document.getElementById("gap").addEventListener("click", () => {
  errorBox.textContent = "";
  try {
    readEconomy();
    const criteria = [document.getElementById("criterion").value];
    if (document.getElementById("with-pareto").checked) criteria.push("pareto");
    gap = JSON.parse(gap_map(economyInput.value, JSON.stringify({ n: 60, criteria })));
    gapSummary.textContent = `Smallest joint violation ${fmt(gap.min)} at (${gap.argmin.map(fmt).join(", ")}).`;
    draw();
  } catch (err) {
    fail(err);
  }
});

document.getElementById("clear-gap").addEventListener("click", () => {
  gap = null;
  gapSummary.textContent = "";
  draw();
});

economyInput.addEventListener("change", () => {
  gap = null;
  gapSummary.textContent = "";
  try {
    readEconomy();
    first = economy.endowment.map((e) => e / 2);
  } catch (_) { /* reported by refresh */ }
  refresh();
});

await init();
economyInput.value = JSON.stringify(DEFAULT_ECONOMY, null, 2);
refresh();
