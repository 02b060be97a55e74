/**
 * Typed client for the review-service HTTP API. All state lives on the
 * server; this module only shuttles JSON and surfaces server errors
 * verbatim (non-2xx responses throw ApiError with the server's message).
 */

export interface CandidateRef {
  signal: string;
  similarity: number;
}

export interface AlignmentSummary {
  id: string;
  property: string;
  status: string;
  mapping_kind: string;
  contributing_signals: string[];
  confidence: number;
  candidates: CandidateRef[];
}

export interface HistoryEntry {
  timestamp: number;
  action: string;
  actor: string;
  constraint: string;
}

export interface AlignmentDetail extends AlignmentSummary {
  alignment: Record<string, unknown>;
  history: HistoryEntry[];
}

export interface CodePreview {
  property: string;
  code: Record<string, string>;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const message =
      typeof (body as { error?: string }).error === "string"
        ? (body as { error: string }).error
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class ReviewClient {
  constructor(private readonly base: string = "") {}

  listAlignments(status?: string): Promise<{ items: AlignmentSummary[] }> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return request(`${this.base}/api/alignments${query}`);
  }

  getAlignment(id: string): Promise<AlignmentDetail> {
    return request(`${this.base}/api/alignments/${encodeURIComponent(id)}`);
  }

  postDecision(
    id: string,
    action: "approve" | "reject",
    actor: string,
  ): Promise<AlignmentDetail> {
    return request(`${this.base}/api/alignments/${encodeURIComponent(id)}/decision`, {
      method: "POST",
      body: JSON.stringify({ action, actor }),
    });
  }

  postRegeneration(
    id: string,
    constraint: string,
    actor: string,
  ): Promise<AlignmentDetail> {
    return request(
      `${this.base}/api/alignments/${encodeURIComponent(id)}/regenerate`,
      {
        method: "POST",
        body: JSON.stringify({ constraint, actor }),
      },
    );
  }

  getCode(id: string): Promise<CodePreview> {
    return request(`${this.base}/api/artifacts/${encodeURIComponent(id)}/code`);
  }
}
