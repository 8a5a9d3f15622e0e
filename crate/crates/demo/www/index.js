import init, { generateBlobs, cluster, compare } from "./pkg/evoclust_demo.js";

const EXTENT = 100;
const PAD = 10;
const NAMES = ["k-means", "GA-clustering", "improved k-means", "IGK"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const canvas = $("plot");
const ctx = canvas.getContext("2d");

let points = new Float64Array();

// Coordinates can stray outside the box by a few spreads.
function toCanvas(x, y) {
  const lo = -3 * num("spread"), hi = EXTENT + 3 * num("spread");
  const scale = (canvas.width - 2 * PAD) / (hi - lo);
  return [PAD + (x - lo) * scale, canvas.height - PAD - (y - lo) * scale];
}

function colour(i, k) {
  return `hsl(${Math.round((360 * i) / Math.max(k, 1))}, 70%, 45%)`;
}

function drawCenters(centers, style, size) {
  ctx.strokeStyle = style;
  ctx.lineWidth = 2;
  for (let i = 0; i < centers.length; i += 2) {
    const [x, y] = toCanvas(centers[i], centers[i + 1]);
    ctx.beginPath();
    ctx.moveTo(x - size, y - size); ctx.lineTo(x + size, y + size);
    ctx.moveTo(x + size, y - size); ctx.lineTo(x - size, y + size);
    ctx.stroke();
  }
}

function draw(result) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const k = result ? result.centers.length / 2 : 1;
  const assignment = result ? result.assignment : null;
  for (let i = 0; i < points.length / 2; i++) {
    const [x, y] = toCanvas(points[2 * i], points[2 * i + 1]);
    ctx.fillStyle = assignment ? colour(assignment[i], k) : "#888";
    ctx.fillRect(x - 2, y - 2, 4, 4);
  }
  if (!result) return;
  if ($("showWorking").checked && result.working.length) drawCenters(result.working, "#aaa", 4);
  drawCenters(result.centers, "#000", 7);
}

function guarded(fn) {
  return () => {
    $("status").textContent = "working...";
    // let the status paint before the synchronous wasm call
    setTimeout(() => {
      try {
        fn();
      } catch (e) {
        $("status").textContent = `error: ${e.message ?? e}`;
      }
    }, 10);
  };
}

function generate() {
  points = generateBlobs(num("blobs"), num("n"), num("spread"), BigInt(num("dataSeed")));
  $("results").hidden = true;
  draw(null);
  $("status").textContent = `${points.length / 2} points`;
}

function run() {
  const t0 = performance.now();
  const r = cluster(points, $("algo").value, num("k"), num("kprime"), BigInt(num("runSeed")));
  draw(r);
  const ms = Math.round(performance.now() - t0);
  $("status").textContent = `Jc = ${r.jc.toFixed(4)} (${ms} ms)`;
  r.free();
}

function compareAll() {
  const avgs = compare(points, num("k"), num("kprime"), 5, BigInt(num("runSeed")));
  const body = $("results").querySelector("tbody");
  body.replaceChildren(...NAMES.map((name, i) => {
    const tr = document.createElement("tr");
    tr.innerHTML = `<td>${name}</td><td>${avgs[i].toFixed(4)}</td>`;
    return tr;
  }));
  $("results").hidden = false;
  $("status").textContent = "averages over seeds " + num("runSeed") + ".." + (num("runSeed") + 4);
}

await init();
$("generate").onclick = guarded(generate);
$("run").onclick = guarded(run);
$("compare").onclick = guarded(compareAll);
guarded(generate)();
