/** Panel controller: pure state + transitions, no DOM.
 *
 * The live view and still display are written through narrow element
 * interfaces so the controller is testable with plain objects; main.ts
 * passes the real <img> elements. Slider input is clamped and
 * rate-limited, captures are guarded against double submission, and a
 * 1 Hz status poll keeps the settings mirror and stats honest. */

import type { ControlApi, StreamStats } from "./api.js";
import { clampSetting, DEFAULT_SETTINGS } from "./ranges.js";
import type { CameraSettings, SettingName } from "./ranges.js";
import { rateLimit, type Sender } from "./ratelimit.js";

export interface ImageSlot {
  src: string;
}

export interface PanelState {
  streaming: boolean;
  settings: CameraSettings;
  stats: StreamStats | null;
  lastStill: string | null;
  banner: string | null;
  inlineErrors: Partial<Record<SettingName, string>>;
}

export interface PanelOptions {
  /** >= 250 keeps slider traffic at or under 4 requests/second. */
  minSendIntervalMs?: number;
  pollIntervalMs?: number;
  /** injected for tests; real panels wait for the capture loop */
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class Panel {
  readonly state: PanelState = {
    streaming: false,
    settings: { ...DEFAULT_SETTINGS },
    stats: null,
    lastStill: null,
    banner: null,
    inlineErrors: {},
  };

  /** called after every state change so the DOM layer can re-render */
  onRender: () => void = () => {};

  private captureInFlight = false;
  private senders = new Map<SettingName, Sender<number>>();
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private stillCounter = 0;
  private readonly minSendIntervalMs: number;
  private readonly pollIntervalMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private api: ControlApi,
    private live: ImageSlot,
    private still: ImageSlot,
    opts: PanelOptions = {},
  ) {
    this.minSendIntervalMs = opts.minSendIntervalMs ?? 250;
    this.pollIntervalMs = opts.pollIntervalMs ?? 1000;
    this.sleep = opts.sleep ?? defaultSleep;
  }

  // --- live view ---

  toggleStream(): void {
    if (this.state.streaming) {
      this.live.src = "";
      this.state.streaming = false;
    } else {
      this.state.banner = null;
      this.live.src = this.api.streamUrl();
      this.state.streaming = true;
    }
    this.onRender();
  }

  /** wired to the live <img>'s error event */
  onLiveViewError(): void {
    if (!this.state.streaming) {
      return;
    }
    this.live.src = "";
    this.state.streaming = false;
    this.state.banner = "live view unavailable — is the relay running?";
    this.onRender();
  }

  // --- still capture ---

  async captureStill(): Promise<void> {
    if (this.captureInFlight) {
      return; // one click, one request
    }
    this.captureInFlight = true;
    try {
      await this.api.capture();
      // give the capture loop time to seal the new still before fetching
      const interval = 1000 / Math.max(1, this.state.settings.fps_limit);
      await this.sleep(Math.min(2 * interval, 1500));
      const url = this.api.stillUrl(++this.stillCounter);
      this.still.src = url;
      this.state.lastStill = url;
      this.state.banner = null;
    } catch (err) {
      // keep the previous still on screen
      this.state.banner = `capture failed: ${(err as Error).message}`;
    } finally {
      this.captureInFlight = false;
      this.onRender();
    }
  }

  onStillError(): void {
    this.state.banner = "still not available from the relay yet";
    this.onRender();
  }

  // --- controls ---

  /** Slider input: clamp, collapse the burst, send at most 4/s.
   * Returns the clamped value so the widget can snap to it. */
  controlInput(name: SettingName, rawValue: number): number {
    const value = clampSetting(name, rawValue);
    let sender = this.senders.get(name);
    if (sender === undefined) {
      sender = rateLimit(
        (v: number) => void this.sendControl(name, v),
        this.minSendIntervalMs,
      );
      this.senders.set(name, sender);
    }
    sender(value);
    return value;
  }

  private async sendControl(name: SettingName, value: number): Promise<void> {
    try {
      await this.api.setControl(name, value);
      this.state.settings = { ...this.state.settings, [name]: value };
      delete this.state.inlineErrors[name];
    } catch (err) {
      this.state.inlineErrors[name] = (err as Error).message;
    }
    this.onRender();
  }

  // --- status polling ---

  async refreshStatus(): Promise<void> {
    try {
      const payload = await this.api.status();
      this.state.settings = { ...payload.settings };
      this.state.stats = payload.stats;
    } catch (err) {
      this.state.stats = null;
      this.state.banner = `device unreachable: ${(err as Error).message}`;
    }
    this.onRender();
  }

  startPolling(): void {
    if (this.pollTimer !== null) {
      return;
    }
    void this.refreshStatus();
    this.pollTimer = setInterval(() => void this.refreshStatus(), this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }
}
