export interface SessionCreated {
  session_id: string;
  text: string;
  state: string;
  outcome: string;
  turn: number;
}

export interface TurnReply {
  text: string;
  state: string;
  outcome: string;
  turn: number;
  fired_rules: number[];
  variables: Record<string, string>;
}

export interface SessionInfo {
  state: string;
  variables: Record<string, string>;
  turn: number;
  ended: boolean;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
  ) {
    super(`${status}: ${code}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  if (!response.ok) {
    let code = 'unknown_error';
    try {
      const body = await response.json();
      if (typeof body?.error === 'string') code = body.error;
    } catch {
      // non-JSON error body; keep the fallback code
    }
    throw new ApiError(response.status, code);
  }
  return response.json() as Promise<T>;
}

export class ChatApi {
  constructor(private readonly base: string = '') {}

  createSession(): Promise<SessionCreated> {
    return request<SessionCreated>(this.base, '/api/session', { method: 'POST' });
  }

  sendMessage(sessionId: string, text: string): Promise<TurnReply> {
    return request<TurnReply>(this.base, '/api/chat', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ session_id: sessionId, text }),
    });
  }

  getSession(sessionId: string): Promise<SessionInfo> {
    return request<SessionInfo>(this.base, `/api/session/${sessionId}`);
  }
}
