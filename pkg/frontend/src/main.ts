/** DOM bootstrap: binds the panel controller to the page. This is the
 * only module that touches `document`. */

import { ControlApi } from "./api.js";
import { resolveConfig } from "./config.js";
import { Panel } from "./panel.js";
import { SETTING_RANGES, type SettingName } from "./ranges.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

const config = resolveConfig(window.location.search, window.location.origin);
byId<HTMLSpanElement>("device-url").textContent = config.deviceBase;
byId<HTMLSpanElement>("relay-url").textContent = config.relayBase;

const live = byId<HTMLImageElement>("live");
const still = byId<HTMLImageElement>("still");
const banner = byId<HTMLDivElement>("banner");
const streamBtn = byId<HTMLButtonElement>("stream-btn");
const captureBtn = byId<HTMLButtonElement>("capture-btn");
const statsBox = byId<HTMLPreElement>("stats");

const api = new ControlApi(config.deviceBase, config.relayBase);
const panel = new Panel(api, live, still);

const sliders = new Map<SettingName, HTMLInputElement>();
const valueLabels = new Map<SettingName, HTMLSpanElement>();
const errorLabels = new Map<SettingName, HTMLSpanElement>();

for (const name of Object.keys(SETTING_RANGES) as SettingName[]) {
  const slider = byId<HTMLInputElement>(`ctl-${name}`);
  const [lo, hi] = SETTING_RANGES[name];
  slider.min = String(lo);
  slider.max = String(hi);
  slider.step = "1";
  slider.addEventListener("input", () => {
    const snapped = panel.controlInput(name, Number(slider.value));
    slider.value = String(snapped);
    valueLabels.get(name)!.textContent = String(snapped);
  });
  sliders.set(name, slider);
  valueLabels.set(name, byId<HTMLSpanElement>(`val-${name}`));
  errorLabels.set(name, byId<HTMLSpanElement>(`err-${name}`));
}

streamBtn.addEventListener("click", () => panel.toggleStream());
captureBtn.addEventListener("click", () => void panel.captureStill());
live.addEventListener("error", () => panel.onLiveViewError());
still.addEventListener("error", () => panel.onStillError());

panel.onRender = () => {
  streamBtn.textContent = panel.state.streaming ? "Stop Stream" : "Start Stream";
  banner.hidden = panel.state.banner === null;
  banner.textContent = panel.state.banner ?? "";
  for (const [name, slider] of sliders) {
    if (document.activeElement !== slider) {
      slider.value = String(panel.state.settings[name]);
      valueLabels.get(name)!.textContent = String(panel.state.settings[name]);
    }
    const err = panel.state.inlineErrors[name];
    errorLabels.get(name)!.textContent = err ?? "";
  }
  const stats = panel.state.stats;
  statsBox.textContent =
    stats === null
      ? "no stats yet"
      : [
          `fps          ${stats.fps.toFixed(2)}`,
          `bytes/s      ${stats.bytes_per_sec.toFixed(0)}`,
          `seal p50     ${stats.encrypt_p50_us.toFixed(0)} us`,
          `seal p95     ${stats.encrypt_p95_us.toFixed(0)} us`,
          `seal p99     ${stats.encrypt_p99_us.toFixed(0)} us`,
          `frames sent  ${stats.frames_sent}`,
        ].join("\n");
};

panel.onRender();
panel.startPolling();
