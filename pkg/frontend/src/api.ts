/** HTTP client for the two trusted surfaces the panel may talk to:
 * the device's control/status endpoints and the relay's plaintext
 * endpoints. The panel never touches key material or ciphertext; the
 * relay decrypts, the device encrypts, and this file is the complete
 * list of URLs the panel uses. */

import type { CameraSettings, SettingName } from "./ranges.js";

export interface StreamStats {
  fps: number;
  bytes_per_sec: number;
  encrypt_p50_us: number;
  encrypt_p95_us: number;
  encrypt_p99_us: number;
  frames_sent: number;
}

export interface StatusPayload {
  settings: CameraSettings;
  mode: string;
  key_id: number;
  stats: StreamStats;
}

export interface ResponseLike {
  ok: boolean;
  status: number;
  text(): Promise<string>;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string) => Promise<ResponseLike>;

function stripSlash(base: string): string {
  return base.endsWith("/") ? base.slice(0, -1) : base;
}

export class ControlApi {
  readonly deviceBase: string;
  readonly relayBase: string;
  private fetchFn: FetchLike;

  constructor(deviceBase: string, relayBase: string, fetchFn?: FetchLike) {
    this.deviceBase = stripSlash(deviceBase);
    this.relayBase = stripSlash(relayBase);
    this.fetchFn = fetchFn ?? ((url) => fetch(url, { cache: "no-store" }));
  }

  /** Arm the device's capture flag. One call, one GET. */
  async capture(): Promise<void> {
    const resp = await this.fetchFn(`${this.deviceBase}/capture`);
    if (!resp.ok) {
      throw new Error(`capture failed: HTTP ${resp.status}`);
    }
  }

  /** Apply one setting; the device answers 400 with a reason on bad input. */
  async setControl(name: SettingName, value: number): Promise<void> {
    const resp = await this.fetchFn(
      `${this.deviceBase}/control?var=${name}&val=${value}`,
    );
    if (!resp.ok) {
      const reason = await resp.text();
      throw new Error(reason || `HTTP ${resp.status}`);
    }
  }

  async status(): Promise<StatusPayload> {
    const resp = await this.fetchFn(`${this.deviceBase}/status`);
    if (!resp.ok) {
      throw new Error(`status failed: HTTP ${resp.status}`);
    }
    return (await resp.json()) as StatusPayload;
  }

  /** Live view source: the relay's plaintext MJPEG stream. */
  streamUrl(): string {
    return `${this.relayBase}/stream`;
  }

  /** Decrypted still via the relay; cacheBust forces a fresh fetch. */
  stillUrl(cacheBust: number): string {
    return `${this.relayBase}/still?t=${cacheBust}`;
  }
}
