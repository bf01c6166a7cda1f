import init, { event_spectrogram, gaussian_det, compare_scorers } from "./pkg/sre_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(el, f) {
  try {
    el.classList.remove("err");
    f();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e.message ?? e);
  }
}

function heat(v) {
  const r = Math.round(255 * Math.min(1, 1.5 * v));
  const g = Math.round(255 * Math.max(0, Math.min(1, 1.5 * v - 0.4)));
  const b = Math.round(255 * Math.max(0, 0.6 - v));
  return [r, g, b];
}

function drawSpectrogram() {
  report($("spec-out"), () => {
    const s = event_spectrogram($("spec-event").value, num("spec-speaker"), num("spec-take"), BigInt(num("spec-seed")), num("spec-mels"));
    const v = s.values, T = s.n_frames, M = s.n_mels;
    let lo = Infinity, hi = -Infinity;
    for (const x of v) { lo = Math.min(lo, x); hi = Math.max(hi, x); }
    const c = $("spec-canvas"), ctx = c.getContext("2d");
    const img = ctx.createImageData(T, M);
    for (let t = 0; t < T; t++) {
      for (let m = 0; m < M; m++) {
        const [r, g, b] = heat((v[t * M + m] - lo) / (hi - lo || 1));
        const k = 4 * ((M - 1 - m) * T + t);
        img.data.set([r, g, b, 255], k);
      }
    }
    const tmp = new OffscreenCanvas(T, M);
    tmp.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, c.width, c.height);
    ctx.drawImage(tmp, 0, 0, c.width, c.height);

    const w = s.waveform, wc = $("spec-wave"), wx = wc.getContext("2d");
    wx.clearRect(0, 0, wc.width, wc.height);
    wx.beginPath();
    for (let i = 0; i < w.length; i++) {
      const x = (i / w.length) * wc.width, y = wc.height / 2 - w[i] * wc.height / 2;
      i ? wx.lineTo(x, y) : wx.moveTo(x, y);
    }
    wx.stroke();
    $("spec-out").textContent = `${T} frames × ${M} mels, ${(1000 * s.duration_s).toFixed(0)} ms, log energy ${lo.toFixed(2)} … ${hi.toFixed(2)}`;
  });
}

function drawDet() {
  $("det-sep-v").textContent = $("det-sep").value;
  report($("det-out"), () => {
    const d = gaussian_det(num("det-nt"), num("det-nn"), num("det-sep"), BigInt(num("det-seed")));
    const c = $("det-canvas"), ctx = c.getContext("2d"), W = c.width, H = c.height, pad = 30;
    const px = (far) => pad + far * (W - 2 * pad), py = (frr) => H - pad - frr * (H - 2 * pad);
    ctx.clearRect(0, 0, W, H);
    ctx.strokeStyle = "#999";
    ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
    ctx.beginPath(); ctx.moveTo(px(0), py(0)); ctx.lineTo(px(1), py(1)); ctx.setLineDash([4, 4]); ctx.stroke(); ctx.setLineDash([]);
    const far = d.far, frr = d.frr;
    ctx.strokeStyle = "#0a5"; ctx.lineWidth = 2; ctx.beginPath();
    for (let i = 0; i < far.length; i++) { i ? ctx.lineTo(px(far[i]), py(frr[i])) : ctx.moveTo(px(far[i]), py(frr[i])); }
    ctx.stroke(); ctx.lineWidth = 1;
    ctx.fillStyle = "#c00"; ctx.beginPath(); ctx.arc(px(d.eer), py(d.eer), 4, 0, 2 * Math.PI); ctx.fill();
    ctx.fillStyle = "#222"; ctx.fillText("false accept rate", W / 2 - 40, H - 8);
    ctx.save(); ctx.translate(12, H / 2 + 40); ctx.rotate(-Math.PI / 2); ctx.fillText("false reject rate", 0, 0); ctx.restore();
    $("det-out").textContent = `EER ${(100 * d.eer).toFixed(2)}% at threshold ${d.threshold.toFixed(3)} (${far.length} operating points)`;
  });
}

function drawScorers() {
  report($("sc-out"), () => {
    const r = compare_scorers(num("sc-spk"), num("sc-utt"), num("sc-dim"), num("sc-nuis"), num("sc-within"), BigInt(num("sc-seed")));
    const rows = [["cosine", r.cosine], ["LDA + cosine", r.lda], ["PLDA", r.plda]];
    const c = $("sc-canvas"), ctx = c.getContext("2d"), W = c.width;
    ctx.clearRect(0, 0, W, c.height);
    const top = Math.max(0.05, ...rows.map((x) => x[1]));
    rows.forEach(([name, e], i) => {
      const y = 20 + i * 50;
      ctx.fillStyle = "#222"; ctx.fillText(name, 5, y + 20);
      ctx.fillStyle = ["#888", "#37c", "#c63"][i];
      ctx.fillRect(110, y, (e / top) * (W - 180), 30);
      ctx.fillStyle = "#222"; ctx.fillText(`${(100 * e).toFixed(2)}%`, 115 + (e / top) * (W - 180), y + 20);
    });
    $("sc-out").textContent = `EER cosine ${(100 * r.cosine).toFixed(2)}%, LDA ${(100 * r.lda).toFixed(2)}% (dim ${r.lda_dim}), PLDA ${(100 * r.plda).toFixed(2)}%`;
  });
}

await init();
$("spec-go").onclick = drawSpectrogram;
for (const id of ["det-sep", "det-nt", "det-nn", "det-seed"]) $(id).oninput = drawDet;
$("sc-go").onclick = drawScorers;
drawSpectrogram();
drawDet();
drawScorers();
