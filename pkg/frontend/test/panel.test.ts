/** Panel controller tests, covering the acceptance behaviors: stream
 * toggle attach/detach, exactly-one /capture per click with the still
 * displayed via the relay, and slider changes confirmed through the
 * status poll. */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ControlApi, type ResponseLike, type StatusPayload } from "../src/api.js";
import { Panel, type ImageSlot } from "../src/panel.js";

const DEVICE = "http://dev:8032";
const RELAY = "http://relay:8033";

class FakeDevice {
  settings = { framesize: 5, quality: 10, brightness: 0, contrast: 0, fps_limit: 10 };
  captureCalls = 0;
  controlCalls: string[] = [];
  failAll = false;

  fetch = async (url: string): Promise<ResponseLike> => {
    if (this.failAll) {
      return this.respond(503, "down");
    }
    const u = new URL(url);
    if (u.pathname === "/capture") {
      this.captureCalls += 1;
      return this.respond(200, "Taking Photo");
    }
    if (u.pathname === "/control") {
      const name = u.searchParams.get("var")!;
      const val = Number(u.searchParams.get("val"));
      this.controlCalls.push(`${name}=${val}`);
      if (!(name in this.settings)) {
        return this.respond(400, `no such setting: ${name}`);
      }
      (this.settings as Record<string, number>)[name] = val;
      return this.respond(200, "");
    }
    if (u.pathname === "/status") {
      const payload: StatusPayload = {
        settings: { ...this.settings },
        mode: "ctr",
        key_id: 0,
        stats: {
          fps: 9.9, bytes_per_sec: 1, encrypt_p50_us: 1,
          encrypt_p95_us: 1, encrypt_p99_us: 1, frames_sent: 5,
        },
      };
      return this.respond(200, JSON.stringify(payload));
    }
    return this.respond(404, "not found");
  };

  private respond(status: number, body: string): ResponseLike {
    return {
      ok: status >= 200 && status < 300,
      status,
      text: async () => body,
      json: async () => JSON.parse(body),
    };
  }
}

function makePanel(device = new FakeDevice()) {
  const live: ImageSlot = { src: "" };
  const still: ImageSlot = { src: "" };
  const api = new ControlApi(DEVICE, RELAY, device.fetch);
  const panel = new Panel(api, live, still, {
    sleep: async () => undefined,  // no capture-loop wait in tests
  });
  return { panel, live, still, device };
}

describe("stream toggle", () => {
  it("attaches the live view to the relay stream and detaches on the second press", () => {
    const { panel, live } = makePanel();
    panel.toggleStream();
    expect(live.src).toBe(`${RELAY}/stream`);
    expect(panel.state.streaming).toBe(true);
    panel.toggleStream();
    expect(live.src).toBe("");
    expect(panel.state.streaming).toBe(false);
  });

  it("drops to a consistent error state when the relay is down", () => {
    const { panel, live } = makePanel();
    panel.toggleStream();
    panel.onLiveViewError(); // <img> error event
    expect(panel.state.streaming).toBe(false);
    expect(live.src).toBe("");
    expect(panel.state.banner).toMatch(/relay/);
  });
});

describe("capture still", () => {
  it("issues exactly one /capture and displays the new still via the relay", async () => {
    const { panel, still, device } = makePanel();
    await panel.captureStill();
    expect(device.captureCalls).toBe(1);
    expect(still.src).toBe(`${RELAY}/still?t=1`);
    expect(panel.state.lastStill).toBe(still.src);
  });

  it("re-fetches with a fresh cache-bust on each capture", async () => {
    const { panel, still } = makePanel();
    await panel.captureStill();
    await panel.captureStill();
    expect(still.src).toBe(`${RELAY}/still?t=2`);
  });

  it("suppresses duplicate submissions while one is in flight", async () => {
    const device = new FakeDevice();
    let release: () => void = () => undefined;
    const gate = new Promise<void>((r) => (release = r));
    const slowFetch = async (url: string) => {
      await gate;
      return device.fetch(url);
    };
    const api = new ControlApi(DEVICE, RELAY, slowFetch);
    const panel = new Panel(api, { src: "" }, { src: "" }, {
      sleep: async () => undefined,
    });
    const first = panel.captureStill();
    const second = panel.captureStill(); // ignored: one in flight
    release();
    await Promise.all([first, second]);
    expect(device.captureCalls).toBe(1);
  });

  it("keeps the previous still and raises the banner on failure", async () => {
    const { panel, still, device } = makePanel();
    await panel.captureStill();
    device.failAll = true;
    await panel.captureStill();
    expect(still.src).toBe(`${RELAY}/still?t=1`); // no stale swap
    expect(panel.state.banner).toMatch(/capture failed/);
  });
});

describe("controls", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("clamps slider input to the device range", () => {
    const { panel } = makePanel();
    expect(panel.controlInput("brightness", 7)).toBe(2);
    expect(panel.controlInput("framesize", -3)).toBe(0);
  });

  it("a slider change lands on the device and the poll confirms it within 2s", async () => {
    const { panel, device } = makePanel();
    panel.controlInput("framesize", 8);
    await vi.runAllTimersAsync();
    expect(device.controlCalls).toContain("framesize=8");
    expect(device.settings.framesize).toBe(8);
    // the 1 Hz poll mirrors the device state well inside 2 s
    await panel.refreshStatus();
    expect(panel.state.settings.framesize).toBe(8);
  });

  it("collapses a drag into at most 4 requests per second", async () => {
    const { panel, device } = makePanel();
    for (let v = 0; v <= 10; v++) {
      panel.controlInput("framesize", v);
      await vi.advanceTimersByTimeAsync(30);
    }
    await vi.runAllTimersAsync();
    expect(device.controlCalls.length).toBeLessThanOrEqual(4);
    expect(device.controlCalls.at(-1)).toBe("framesize=10"); // final position lands
  });

  it("shows device rejections inline next to the control", async () => {
    const { panel, device } = makePanel();
    // bypass the local clamp to exercise the device-side 400 path
    device.settings = {} as never;
    panel.controlInput("framesize", 5);
    await vi.runAllTimersAsync();
    expect(panel.state.inlineErrors.framesize).toMatch(/no such setting/);
  });
});

describe("status polling", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("mirrors device settings and stats at 1 Hz", async () => {
    const { panel, device } = makePanel();
    panel.startPolling();
    await vi.advanceTimersByTimeAsync(0);
    expect(panel.state.stats?.frames_sent).toBe(5);
    device.settings.quality = 30;
    await vi.advanceTimersByTimeAsync(1000);
    expect(panel.state.settings.quality).toBe(30);
    panel.stopPolling();
  });

  it("flags an unreachable device without crashing", async () => {
    const device = new FakeDevice();
    device.failAll = true;
    const { panel } = makePanel(device);
    await panel.refreshStatus();
    expect(panel.state.stats).toBeNull();
    expect(panel.state.banner).toMatch(/unreachable/);
  });
});
