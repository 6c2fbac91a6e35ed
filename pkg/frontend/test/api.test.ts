import { describe, expect, it } from "vitest";

import { ControlApi, type ResponseLike } from "../src/api.js";
import { DEFAULT_RELAY, resolveConfig } from "../src/config.js";

function fakeFetch(
  handler: (url: string) => { status: number; body?: string },
): { urls: string[]; fetch: (url: string) => Promise<ResponseLike> } {
  const urls: string[] = [];
  return {
    urls,
    fetch: async (url: string) => {
      urls.push(url);
      const { status, body = "" } = handler(url);
      return {
        ok: status >= 200 && status < 300,
        status,
        text: async () => body,
        json: async () => JSON.parse(body),
      };
    },
  };
}

const DEVICE = "http://dev:8032";
const RELAY = "http://relay:8033";

describe("ControlApi", () => {
  it("capture issues exactly one GET to the device", async () => {
    const { urls, fetch } = fakeFetch(() => ({ status: 200 }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    await api.capture();
    expect(urls).toEqual([`${DEVICE}/capture`]);
  });

  it("capture surfaces non-200", async () => {
    const { fetch } = fakeFetch(() => ({ status: 503 }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    await expect(api.capture()).rejects.toThrow("HTTP 503");
  });

  it("setControl builds the device query", async () => {
    const { urls, fetch } = fakeFetch(() => ({ status: 200 }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    await api.setControl("framesize", 8);
    expect(urls).toEqual([`${DEVICE}/control?var=framesize&val=8`]);
  });

  it("setControl surfaces the device's 400 reason", async () => {
    const { fetch } = fakeFetch(() => ({
      status: 400,
      body: "framesize=99 outside 0..10",
    }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    await expect(api.setControl("framesize", 99)).rejects.toThrow(
      "framesize=99 outside 0..10",
    );
  });

  it("status parses the payload", async () => {
    const payload = {
      settings: { framesize: 5, quality: 10, brightness: 0, contrast: 0, fps_limit: 10 },
      mode: "ctr",
      key_id: 0,
      stats: {
        fps: 9.9, bytes_per_sec: 180000, encrypt_p50_us: 900,
        encrypt_p95_us: 1200, encrypt_p99_us: 1500, frames_sent: 42,
      },
    };
    const { fetch } = fakeFetch(() => ({ status: 200, body: JSON.stringify(payload) }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    expect(await api.status()).toEqual(payload);
  });

  it("only ever addresses the device control surface and the relay", async () => {
    const { urls, fetch } = fakeFetch(() => ({ status: 200, body: "{}" }));
    const api = new ControlApi(DEVICE, RELAY, fetch);
    await api.capture();
    await api.setControl("quality", 20);
    await api.status().catch(() => undefined);
    const all = [...urls, api.streamUrl(), api.stillUrl(1)];
    for (const url of all) {
      expect(url.startsWith(DEVICE) || url.startsWith(RELAY)).toBe(true);
    }
    // live view and stills come from the relay's plaintext endpoints,
    // never from the device's encrypted ones
    expect(api.streamUrl()).toBe(`${RELAY}/stream`);
    expect(api.stillUrl(7)).toBe(`${RELAY}/still?t=7`);
    expect(all.some((u) => u.includes("saved-photo"))).toBe(false);
  });

  it("tolerates trailing slashes in base urls", () => {
    const api = new ControlApi(`${DEVICE}/`, `${RELAY}/`);
    expect(api.streamUrl()).toBe(`${RELAY}/stream`);
  });
});

describe("resolveConfig", () => {
  it("defaults device to the origin and relay to localhost", () => {
    const cfg = resolveConfig("", "http://10.0.0.5:8032");
    expect(cfg.deviceBase).toBe("http://10.0.0.5:8032");
    expect(cfg.relayBase).toBe(DEFAULT_RELAY);
  });

  it("honors query overrides", () => {
    const cfg = resolveConfig(
      "?device=http://a:1&relay=http://b:2",
      "http://origin",
    );
    expect(cfg.deviceBase).toBe("http://a:1");
    expect(cfg.relayBase).toBe("http://b:2");
  });
});
