import type { Catalogs, ErrorEnvelope, ReportRequest, ReportResponse } from "./types";

export class ServiceError extends Error {
  code: string;
  stage: string;

  constructor(code: string, stage: string, message: string) {
    super(message);
    this.code = code;
    this.stage = stage;
  }
}

async function fail(res: Response): Promise<never> {
  let envelope: ErrorEnvelope | null = null;
  try {
    envelope = (await res.json()) as ErrorEnvelope;
  } catch {
    // non-JSON body; fall through to the generic error
  }
  if (envelope?.error) {
    const { code, stage, message } = envelope.error;
    throw new ServiceError(code, stage, message);
  }
  throw new ServiceError("http_error", "transport", `service returned ${res.status}`);
}

export async function fetchCatalogs(baseUrl = ""): Promise<Catalogs> {
  const res = await fetch(`${baseUrl}/v1/catalogs`);
  if (!res.ok) await fail(res);
  return (await res.json()) as Catalogs;
}

export async function requestReport(
  body: ReportRequest,
  baseUrl = "",
): Promise<ReportResponse> {
  const res = await fetch(`${baseUrl}/v1/bias-report`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) await fail(res);
  return (await res.json()) as ReportResponse;
}
