import init, { Demo, Layer } from "./pkg/jfs_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function paint(id, base, overlay, w, h) {
  const canvas = $(id);
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  ctx.putImageData(new ImageData(new Uint8ClampedArray(base), w, h), 0, 0);
  if (overlay.length === 0) return;
  // blend through a scratch canvas so alpha composites instead of replacing
  const tmp = new OffscreenCanvas(w, h);
  tmp.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(overlay), w, h), 0, 0);
  ctx.drawImage(tmp, 0, 0);
}

function render() {
  const w = demo.width(), h = demo.height();
  const q = demo.query_rgba(), s = demo.support_rgba();
  paint("c-truth", q, demo.overlay_rgba(Layer.Truth), w, h);
  paint("c-coarse", q, demo.overlay_rgba(Layer.Coarse), w, h);
  paint("c-refined", q, demo.overlay_rgba(Layer.Refined), w, h);
  paint("c-support", s, demo.overlay_rgba(Layer.SupportTruth), w, h);
  paint("c-pc", s, demo.overlay_rgba(Layer.PredFromCoarse), w, h);
  paint("c-pr", s, demo.overlay_rgba(Layer.PredFromRefined), w, h);
  $("iouc").textContent = `IoU ${demo.iou_coarse().toFixed(3)}`;
  $("iour").textContent = `IoU ${demo.iou_refined().toFixed(3)}`;
}

function clearJudge() {
  $("ec").textContent = "";
  $("er").textContent = "";
  $("verdict").textContent = "-";
}

function guarded(fn) {
  return () => {
    try {
      $("status").textContent = "";
      fn();
      render();
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  };
}

const seed = () => BigInt($("seed").value || 0);

const rebuild = guarded(() => {
  demo?.free();
  demo = new Demo(seed(), Number($("cls").value));
  clearJudge();
});

const degrade = guarded(() => {
  const gap = Number($("gap").value);
  demo.degrade(seed(), Math.max(gap - 0.05, 0), gap + 0.05);
  clearJudge();
});

const refine = guarded(() => {
  demo.refine(Number($("tau").value));
  clearJudge();
});

const judge = guarded(() => {
  const r = JSON.parse(demo.judge(Number($("lambda").value)));
  $("ec").textContent = `IoU ${r.e_coarse.toFixed(3)}`;
  $("er").textContent = `IoU ${r.e_refined.toFixed(3)}`;
  $("verdict").textContent = r.verdict;
});

for (const id of ["gap", "tau", "lambda"]) {
  const show = () => ($(`${id}v`).textContent = $(id).value);
  $(id).addEventListener("input", show);
  show();
}
$("seed").addEventListener("change", rebuild);
$("cls").addEventListener("change", rebuild);
$("degrade").addEventListener("click", degrade);
$("refine").addEventListener("click", refine);
$("judge").addEventListener("click", judge);

await init();
rebuild();
