import { ApiError, ChatApi, TurnReply } from './api.js';

export interface TranscriptLine {
  speaker: 'bot' | 'you' | 'system';
  text: string;
}

export interface DebugInfo {
  state: string;
  outcome: string;
  turn: number;
  variables: Record<string, string>;
}

export interface ViewState {
  transcript: TranscriptLine[];
  debug: DebugInfo | null;
  busy: boolean;
  ended: boolean;
}

/** Drives one conversation; rejects overlapping sends so the server never
 * sees two in-flight turns for the same session. */
export class ChatController {
  private sessionId: string | null = null;
  private state: ViewState = { transcript: [], debug: null, busy: false, ended: false };
  private listeners: ((state: ViewState) => void)[] = [];

  constructor(private readonly api: ChatApi) {}

  view(): ViewState {
    return this.state;
  }

  subscribe(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  async startConversation(): Promise<void> {
    if (this.state.busy) return;
    this.update({ busy: true });
    try {
      const created = await this.api.createSession();
      this.sessionId = created.session_id;
      this.update({
        transcript: [{ speaker: 'bot', text: created.text }],
        debug: {
          state: created.state,
          outcome: created.outcome,
          turn: created.turn,
          variables: {},
        },
      });
    } catch (err) {
      this.pushSystemLine(err);
    } finally {
      this.update({ busy: false });
    }
  }

  /** Returns the reply, or null when the send was refused (busy, ended, or
   * no session yet). */
  async sendMessage(text: string): Promise<TurnReply | null> {
    const trimmed = text.trim();
    if (!trimmed || this.state.busy || this.state.ended || this.sessionId === null) {
      return null;
    }
    this.update({
      busy: true,
      transcript: [...this.state.transcript, { speaker: 'you', text: trimmed }],
    });
    try {
      const reply = await this.api.sendMessage(this.sessionId, trimmed);
      this.update({
        transcript: [...this.state.transcript, { speaker: 'bot', text: reply.text }],
        debug: {
          state: reply.state,
          outcome: reply.outcome,
          turn: reply.turn,
          variables: reply.variables,
        },
      });
      await this.refreshEnded();
      return reply;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.update({ ended: true });
      }
      this.pushSystemLine(err);
      return null;
    } finally {
      this.update({ busy: false });
    }
  }

  private async refreshEnded(): Promise<void> {
    if (this.sessionId === null) return;
    const info = await this.api.getSession(this.sessionId);
    if (info.ended) this.update({ ended: true });
  }

  private pushSystemLine(err: unknown): void {
    const text = err instanceof Error ? err.message : String(err);
    this.update({
      transcript: [...this.state.transcript, { speaker: 'system', text }],
    });
  }
}
