/** Types mirroring the session-service JSON schema, plus a small client. */

export interface ProvenanceSpan {
  start: number;
  end: number;
  source_turn: number | null;
}

export interface ResultPayload {
  columns: string[];
  rows: (string | number | null)[][];
  total_rows: number;
  execution_failed: boolean;
}

export interface AttentionPayload {
  tokens: { turn: number; token: string }[];
  steps: number[][];
}

export interface SegmentUsed {
  a: number;
  b: number;
  l: number;
  r: number;
  text: string;
}

export interface TurnPayload {
  api_version: string;
  session_id: string;
  turn_index: number;
  utterance: { raw: string; tokens: string[]; anonymized_tokens: string[] };
  sql: { tokens: string[]; text: string; anonymized_tokens: string[] };
  provenance: ProvenanceSpan[];
  result: ResultPayload;
  segments_used: SegmentUsed[];
  attention: AttentionPayload;
  anonymization_added: { placeholder: string; literal: string }[];
}

export interface TranscriptPayload {
  api_version: string;
  session_id: string;
  turns: TurnPayload[];
}

export class ServiceClient {
  constructor(private baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      const detail = await response.text();
      throw new Error(`${response.status}: ${detail}`);
    }
    return (await response.json()) as T;
  }

  createSession(date?: string): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(date ? { date } : {}),
    });
  }

  postUtterance(sessionId: string, text: string): Promise<TurnPayload> {
    return this.request(`/sessions/${sessionId}/utterances`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  getTranscript(sessionId: string): Promise<TranscriptPayload> {
    return this.request(`/sessions/${sessionId}`);
  }

  deleteSession(sessionId: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }
}
