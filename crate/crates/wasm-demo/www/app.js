import init, { toy_json, relaxation, Reconstructor } from "./pkg/qface_demo.js";

const $ = (id) => document.getElementById(id);

function drawToy(view) {
  const cv = $("toy-canvas");
  const ctx = cv.getContext("2d");
  const all = view.train.flat().concat(view.test.flat());
  const span = Math.max(...all.map(([x, y]) => Math.max(Math.abs(x), Math.abs(y)))) * 1.05;
  const px = ([x, y]) => [cv.width / 2 + (x / span) * cv.width / 2, cv.height / 2 - (y / span) * cv.height / 2];
  ctx.clearRect(0, 0, cv.width, cv.height);
  const mark = (p, cls, color) => {
    const [u, v] = px(p);
    ctx.strokeStyle = color;
    ctx.beginPath();
    if (cls === 0) {
      ctx.moveTo(u - 3, v - 3); ctx.lineTo(u + 3, v + 3);
      ctx.moveTo(u + 3, v - 3); ctx.lineTo(u - 3, v + 3);
    } else {
      ctx.arc(u, v, 3, 0, 2 * Math.PI);
    }
    ctx.stroke();
  };
  view.test.forEach((pts, c) => pts.forEach((p) => mark(p, c, "#36c")));
  view.train.forEach((pts, c) => pts.forEach((p) => mark(p, c, "#c3c")));
  const line = ([dx, dy], dash) => {
    ctx.setLineDash(dash);
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 2;
    const [a, b] = [px([-dx * span, -dy * span]), px([dx * span, dy * span])];
    ctx.beginPath(); ctx.moveTo(...a); ctx.lineTo(...b); ctx.stroke();
    ctx.setLineDash([]);
    ctx.lineWidth = 1;
  };
  line(view.direction_2dcpca, []);
  line(view.direction_sr, [6, 4]);
  const f = (v) => v.toFixed(4);
  $("toy-table").innerHTML = `
    <tr><th></th><th>2DCPCA</th><th>SR-2DCPCA</th></tr>
    <tr><td>training variance</td><td>${f(view.train_variance[0])}</td><td>${f(view.train_variance[1])}</td></tr>
    <tr><td>whole-set variance</td><td>${f(view.whole_variance[0])}</td><td>${f(view.whole_variance[1])}</td></tr>
    <tr><td>relaxation</td><td colspan="2">[${f(view.relaxation[0])}, ${f(view.relaxation[1])}]</td></tr>`;
}

function blit(canvas, rgba, size) {
  const img = new ImageData(new Uint8ClampedArray(rgba), size, size);
  const tmp = new OffscreenCanvas(size, size);
  tmp.getContext("2d").putImageData(img, 0, 0);
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

let rec = null;

function buildReconstructor() {
  rec = new Reconstructor(7n, $("rec-sr").checked);
  $("rec-r").max = rec.max_r();
  $("rec-sample").max = rec.samples() - 1;
  showReconstruction();
}

function showReconstruction() {
  const sample = Number($("rec-sample").value);
  const r = Number($("rec-r").value);
  const size = rec.size();
  $("rec-r-label").textContent = `r = ${r}`;
  try {
    blit($("rec-orig"), rec.original_rgba(sample), size);
    blit($("rec-out"), rec.rgba(sample, r), size);
    $("rec-ratio").textContent = `ratio ${rec.ratio(sample, r).toFixed(4)}`;
  } catch (e) {
    $("rec-ratio").textContent = String(e);
  }
}

function showRelaxation() {
  const values = $("rv-input").value.split(",").map(Number);
  try {
    const w = relaxation(new Float64Array(values));
    $("rv-out").innerHTML = Array.from(w)
      .map((v, i) => `<div>class ${i + 1}: <progress max="1" value="${v}"></progress> ${v.toFixed(4)}</div>`)
      .join("");
  } catch (e) {
    $("rv-out").textContent = String(e);
  }
}

await init();
$("toy-run").onclick = () => drawToy(JSON.parse(toy_json(BigInt($("toy-seed").value))));
$("rec-sr").onchange = buildReconstructor;
$("rec-sample").oninput = showReconstruction;
$("rec-r").oninput = showReconstruction;
$("rv-run").onclick = showRelaxation;
$("toy-run").click();
buildReconstructor();
showRelaxation();
