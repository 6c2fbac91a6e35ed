/** Base-URL resolution: the device defaults to the serving origin, the
 * relay to its conventional localhost port; both overridable via query
 * parameters (?device=...&relay=...). */

export interface PanelConfig {
  deviceBase: string;
  relayBase: string;
}

export const DEFAULT_RELAY = "http://127.0.0.1:8033";

export function resolveConfig(search: string, origin: string): PanelConfig {
  const params = new URLSearchParams(search);
  return {
    deviceBase: params.get("device") ?? origin,
    relayBase: params.get("relay") ?? DEFAULT_RELAY,
  };
}
