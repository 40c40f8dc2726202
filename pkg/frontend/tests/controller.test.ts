import { describe, expect, it } from 'vitest';

import { ApiError, ChatApi, SessionCreated, SessionInfo, TurnReply } from '../src/api.js';
import { ChatController } from '../src/controller.js';

interface FakeOptions {
  replyDelayMs?: number;
  ended?: boolean;
  failWith?: ApiError;
}

function fakeApi(options: FakeOptions = {}): { api: ChatApi; sent: string[] } {
  const sent: string[] = [];
  const api = {
    async createSession(): Promise<SessionCreated> {
      return {
        session_id: 's000001',
        text: 'Have you seen any movies lately?',
        state: 'c',
        outcome: 'Matched',
        turn: 1,
      };
    },
    async sendMessage(_sessionId: string, text: string): Promise<TurnReply> {
      if (options.failWith) throw options.failWith;
      sent.push(text);
      if (options.replyDelayMs) {
        await new Promise((resolve) => setTimeout(resolve, options.replyDelayMs));
      }
      return {
        text: `echo ${text}`,
        state: 'c',
        outcome: 'Matched',
        turn: 3,
        fired_rules: [],
        variables: { MOVIE: 'star wars' },
      };
    },
    async getSession(): Promise<SessionInfo> {
      return { state: 'c', variables: {}, turn: 3, ended: options.ended ?? false };
    },
  };
  return { api: api as unknown as ChatApi, sent };
}

describe('ChatController', () => {
  it('starts a conversation with the opening line and debug info', async () => {
    const controller = new ChatController(fakeApi().api);
    await controller.startConversation();
    const view = controller.view();
    expect(view.transcript).toEqual([
      { speaker: 'bot', text: 'Have you seen any movies lately?' },
    ]);
    expect(view.debug).toMatchObject({ state: 'c', outcome: 'Matched', turn: 1 });
    expect(view.busy).toBe(false);
  });

  it('appends both sides of an exchange and exposes variables', async () => {
    const controller = new ChatController(fakeApi().api);
    await controller.startConversation();
    const reply = await controller.sendMessage('I saw star wars');
    expect(reply?.text).toBe('echo I saw star wars');
    const view = controller.view();
    expect(view.transcript.map((l) => l.speaker)).toEqual(['bot', 'you', 'bot']);
    expect(view.debug?.variables).toEqual({ MOVIE: 'star wars' });
  });

  it('refuses overlapping sends while a reply is in flight', async () => {
    const { api, sent } = fakeApi({ replyDelayMs: 30 });
    const controller = new ChatController(api);
    await controller.startConversation();
    const first = controller.sendMessage('one');
    const second = await controller.sendMessage('two');
    expect(second).toBeNull();
    await first;
    expect(sent).toEqual(['one']);
  });

  it('refuses empty input and input before a session exists', async () => {
    const { api, sent } = fakeApi();
    const controller = new ChatController(api);
    expect(await controller.sendMessage('hello')).toBeNull();
    await controller.startConversation();
    expect(await controller.sendMessage('   ')).toBeNull();
    expect(sent).toEqual([]);
  });

  it('locks the conversation once the server reports it ended', async () => {
    const { api, sent } = fakeApi({ ended: true });
    const controller = new ChatController(api);
    await controller.startConversation();
    await controller.sendMessage('I watched avengers');
    expect(controller.view().ended).toBe(true);
    expect(await controller.sendMessage('more?')).toBeNull();
    expect(sent).toEqual(['I watched avengers']);
  });

  it('surfaces API errors as system lines and treats 409 as ended', async () => {
    const { api } = fakeApi({ failWith: new ApiError(409, 'out_of_turn') });
    const controller = new ChatController(api);
    await controller.startConversation();
    const reply = await controller.sendMessage('hello');
    expect(reply).toBeNull();
    const view = controller.view();
    expect(view.ended).toBe(true);
    expect(view.transcript.at(-1)).toEqual({
      speaker: 'system',
      text: '409: out_of_turn',
    });
  });

  it('notifies subscribers on every state change', async () => {
    const controller = new ChatController(fakeApi().api);
    let calls = 0;
    controller.subscribe(() => {
      calls += 1;
    });
    await controller.startConversation();
    expect(calls).toBeGreaterThan(0);
  });
});
