// Thin typed client over the engine's HTTP API. Every UI mutation goes
// through these functions and nothing else.

import type { ConfigDoc, LogFileInfo, StatusResponse } from "./types.js";

export interface ApiFailure {
  ok: false;
  status: number;
  violations: string[];
}

export type ApiResult<T> = ({ ok: true } & T) | ApiFailure;

async function failure(response: Response): Promise<ApiFailure> {
  let violations: string[] = [`HTTP ${response.status}`];
  try {
    const body = await response.json();
    if (Array.isArray(body.violations)) {
      violations = body.violations;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return { ok: false, status: response.status, violations };
}

export async function getStatus(base = ""): Promise<StatusResponse> {
  const response = await fetch(`${base}/api/status`);
  if (!response.ok) throw new Error(`status endpoint: HTTP ${response.status}`);
  return response.json();
}

export async function getConfig(base = ""): Promise<ConfigDoc> {
  const response = await fetch(`${base}/api/config`);
  if (!response.ok) throw new Error(`config endpoint: HTTP ${response.status}`);
  return response.json();
}

export async function putConfig(
  doc: ConfigDoc,
  base = "",
): Promise<ApiResult<{ applied: boolean }>> {
  const response = await fetch(`${base}/api/config`, {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(doc),
  });
  if (!response.ok) return failure(response);
  return { ok: true, ...(await response.json()) };
}

export async function listLogs(base = ""): Promise<LogFileInfo[]> {
  const response = await fetch(`${base}/api/logs`);
  if (!response.ok) throw new Error(`logs endpoint: HTTP ${response.status}`);
  return response.json();
}

export function logDownloadUrl(session: string, base = ""): string {
  return `${base}/api/logs/${encodeURIComponent(session)}`;
}

export async function uploadModel(
  blob: Blob,
  filename: string,
  base = "",
): Promise<ApiResult<{ model_name: string; dimension: number }>> {
  const form = new FormData();
  form.append("file", blob, filename);
  const response = await fetch(`${base}/api/model`, { method: "POST", body: form });
  if (!response.ok) return failure(response);
  return { ok: true, ...(await response.json()) };
}
