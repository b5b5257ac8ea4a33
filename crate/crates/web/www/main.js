import init, { trajectory, hysteresis, efficiency } from "./pkg/micromaser_web.js";

const num = (id) => Number(document.getElementById(id).value);

function axes(ctx, w, h, pad, xmax, ymax, xlabel, ylabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(xlabel + " (0 to " + xmax.toPrecision(3) + ")", w / 2 - 40, h - 6);
  ctx.save();
  ctx.translate(12, h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel + " (max " + ymax.toPrecision(3) + ")", 0, 0);
  ctx.restore();
  return {
    x: (v) => pad + (v / xmax) * (w - pad - 8),
    y: (v) => h - pad - (v / ymax) * (h - pad - 16),
  };
}

function line(ctx, pts, map, colour, dashed, stairs) {
  ctx.strokeStyle = colour;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    if (i === 0) ctx.moveTo(map.x(x), map.y(y));
    else {
      if (stairs) ctx.lineTo(map.x(x), map.y(pts[i - 1][1]));
      ctx.lineTo(map.x(x), map.y(y));
    }
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function runTrajectory() {
  const tEnd = 1.0, inj = 0.5;
  const v = JSON.parse(trajectory(num("t-r"), num("t-g"), num("t-phi"), num("t-dphi"), num("t-bg"), inj, tEnd, num("t-seed")));
  const out = document.getElementById("t-out");
  if (v.error) { out.textContent = v.error; return; }
  const steps = v.steps.concat([[tEnd, v.steps[v.steps.length - 1][1]]]);
  const nmax = Math.max(4, ...steps.map((s) => s[1]));
  const c1 = document.getElementById("t-n").getContext("2d");
  const m1 = axes(c1, 860, 160, 40, tEnd, nmax, "t / s", "n");
  line(c1, steps, m1, "#1f5fa8", false, true);
  c1.fillStyle = "#c00";
  c1.fillText("×", m1.x(inj) - 3, m1.y(0) + 4);
  const rmax = Math.max(100, ...v.rates.map((r) => r[1]));
  const c2 = document.getElementById("t-rate").getContext("2d");
  const m2 = axes(c2, 860, 160, 40, tEnd, rmax, "t / s", "ground rate /s");
  line(c2, v.rates, m2, "#2a8a3a", false, false);
  out.textContent = `ground atoms ${v.ground_atoms}, excited atoms ${v.excited_atoms}`;
}

function runHysteresis() {
  const v = JSON.parse(hysteresis(num("h-g"), num("h-phi"), num("h-dphi"), num("h-min"), num("h-max"), num("h-pts")));
  const out = document.getElementById("h-out");
  if (v.error) { out.textContent = v.error; return; }
  const up = v.up.map((p) => [p.pump_rate, p.output_rate]);
  const down = v.down.map((p) => [p.pump_rate, p.output_rate]);
  const xmax = Math.max(...up.map((p) => p[0]));
  const ymax = Math.max(1, ...up.concat(down).map((p) => p[1]));
  const c = document.getElementById("h-plot").getContext("2d");
  const m = axes(c, 860, 260, 40, xmax, ymax, "input atomic rate R /s", "output ground rate /s");
  line(c, up, m, "#1f5fa8", false, false);
  line(c, down, m, "#c0392b", true, false);
  out.textContent = "solid: up sweep from vacuum, dashed: down sweep after one photon at the top";
}

function runEfficiency() {
  const out = document.getElementById("e-out");
  out.textContent = "running...";
  setTimeout(() => {
    const v = JSON.parse(efficiency(num("e-r"), num("e-th"), num("e-eta"), num("e-bg"),
      document.getElementById("e-two").checked, num("e-n"), 1));
    if (v.error) { out.textContent = v.error; return; }
    out.textContent =
      `efficiency ${v.efficiency.toFixed(3)}  95% CI [${v.ci_low.toFixed(3)}, ${v.ci_high.toFixed(3)}]\n` +
      `detected ${v.detected}/${v.injected}, mean latency ${(1000 * v.mean_latency).toFixed(1)} ms, ` +
      `false triggers ${v.false_triggers}, lost to dead time ${v.dead_time_losses}`;
  }, 10);
}

await init();
document.getElementById("t-run").onclick = runTrajectory;
document.getElementById("h-run").onclick = runHysteresis;
document.getElementById("e-run").onclick = runEfficiency;
runTrajectory();
runHysteresis();
