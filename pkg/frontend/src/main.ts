/**
 * Operator console wiring: socket -> session state -> charts, controls ->
 * commands. The websocket callback is the only writer to session state;
 * rendering happens on animation frames from that state alone.
 */

import { ThrottleRamp } from "./controls.js";
import { ARCHITECTURES, makeConfig, makeInput } from "./protocol.js";
import {
  initialState,
  onError,
  onFrame,
  onStatus,
  type SessionState,
} from "./session.js";
import { CockpitSocket } from "./socket.js";
import { StripChart } from "./plot.js";

const url = `ws://${location.host}/ws`;
let session: SessionState = initialState(15);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const statusEl = $("status");
const errorEl = $("last-error");
const throttleSlider = $<HTMLInputElement>("throttle");
const throttleLabel = $("throttle-label");
const archSelect = $<HTMLSelectElement>("arch");
const delayInput = $<HTMLInputElement>("delay");
const impedanceInput = $<HTMLInputElement>("impedance");
const applyButton = $<HTMLButtonElement>("apply");
const hudEl = $("hud");

for (const arch of ARCHITECTURES) {
  const option = document.createElement("option");
  option.value = arch;
  option.textContent = arch;
  archSelect.appendChild(option);
}
archSelect.value = "wave";

const velocityChart = new StripChart(
  $<HTMLCanvasElement>("chart-velocity"), "command x_o / feedback y_o / remote y_r",
);
const energyChart = new StripChart(
  $<HTMLCanvasElement>("chart-energy"), "wave energy in / out",
);

const socket = new CockpitSocket(url, {
  onFrame: (frame) => {
    if (frame.type === "error") {
      session = onError(session, frame.message);
      return;
    }
    session = onFrame(session, frame);
  },
  onStatus: (status) => {
    session = onStatus(session, status);
  },
});
socket.connect();

const ramp = new ThrottleRamp(0);
let lastSentThrottle: number | null = null;

window.addEventListener("keydown", (ev) => {
  if (ev.repeat) return;
  if (ramp.keyEvent(ev.key, true)) ev.preventDefault();
});
window.addEventListener("keyup", (ev) => {
  if (ramp.keyEvent(ev.key, false)) ev.preventDefault();
});
throttleSlider.addEventListener("input", () => {
  ramp.setDirect(Number(throttleSlider.value));
});

applyButton.addEventListener("click", () => {
  const cmd = makeConfig({
    delay: Number(delayInput.value),
    arch: archSelect.value,
    b: Number(impedanceInput.value),
  });
  if (typeof cmd === "string") {
    session = onError(session, cmd);
    return;
  }
  socket.send(cmd);
});

function pump(nowMs: number): void {
  const throttle = ramp.advance(nowMs);
  throttleSlider.value = throttle.toFixed(2);
  throttleLabel.textContent = throttle.toFixed(2);
  if (session.status === "connected" && throttle !== lastSentThrottle) {
    if (socket.send(makeInput(throttle))) lastSentThrottle = throttle;
  }
  render();
  requestAnimationFrame(pump);
}

function render(): void {
  statusEl.textContent = session.status;
  statusEl.className = `pill ${session.status}`;
  errorEl.textContent = session.lastError ?? "";

  const frame = session.latest;
  if (frame) {
    hudEl.textContent =
      `t=${frame.t.toFixed(2)}s  arch=${frame.arch}  delay=${frame.delay.toFixed(2)}s  ` +
      `tau_est=${frame.tau_est.toFixed(3)}s  zeta=${frame.zeta.toFixed(3)}  ` +
      `frames=${session.framesSeen}`;
  }
  velocityChart.draw(
    [
      { label: "x_o", color: "#5ab0f2", points: session.buffers.x_o },
      { label: "y_o", color: "#f2c75a", points: session.buffers.y_o },
      { label: "y_r", color: "#7af29b", points: session.buffers.y_r },
    ],
    session.horizon,
  );
  energyChart.draw(
    [
      { label: "E_in", color: "#b98af7", points: session.buffers.E_in },
      { label: "E_out", color: "#f78aa7", points: session.buffers.E_out },
    ],
    session.horizon,
  );
}

requestAnimationFrame(pump);
