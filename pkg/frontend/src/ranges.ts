/** Camera setting names and ranges, mirroring the device's contract. */

export interface CameraSettings {
  framesize: number;
  quality: number;
  brightness: number;
  contrast: number;
  fps_limit: number;
}

export type SettingName = keyof CameraSettings;

export const SETTING_RANGES: Record<SettingName, readonly [number, number]> = {
  framesize: [0, 10],
  quality: [10, 63],
  brightness: [-2, 2],
  contrast: [-2, 2],
  fps_limit: [1, 30],
};

export const DEFAULT_SETTINGS: CameraSettings = {
  framesize: 5,
  quality: 10,
  brightness: 0,
  contrast: 0,
  fps_limit: 10,
};

/** Clamp a slider value into the device's accepted range. */
export function clampSetting(name: SettingName, value: number): number {
  const [lo, hi] = SETTING_RANGES[name];
  return Math.min(hi, Math.max(lo, Math.round(value)));
}
