import { ChatController, ViewState } from './controller.js';

function renderDebug(state: ViewState): string {
  if (state.debug === null) return '';
  const vars = Object.entries(state.debug.variables)
    .map(([name, value]) => `<li>${escapeHtml(name)}=${escapeHtml(value)}</li>`)
    .join('');
  return `
    <dl>
      <dt>state</dt><dd id="debug-state">${escapeHtml(state.debug.state)}</dd>
      <dt>outcome</dt><dd id="debug-outcome">${escapeHtml(state.debug.outcome)}</dd>
      <dt>turn</dt><dd id="debug-turn">${state.debug.turn}</dd>
    </dl>
    <ul id="debug-variables">${vars}</ul>`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function mount(root: HTMLElement, controller: ChatController): void {
  root.innerHTML = `
    <main>
      <section id="chat">
        <ul id="transcript"></ul>
        <form id="composer">
          <input id="message" type="text" autocomplete="off"
                 placeholder="Say something" />
          <button id="send" type="submit">Send</button>
        </form>
      </section>
      <aside id="debug"></aside>
    </main>`;

  const transcript = root.querySelector('#transcript') as HTMLUListElement;
  const debug = root.querySelector('#debug') as HTMLElement;
  const form = root.querySelector('#composer') as HTMLFormElement;
  const input = root.querySelector('#message') as HTMLInputElement;
  const send = root.querySelector('#send') as HTMLButtonElement;

  const render = (state: ViewState): void => {
    transcript.innerHTML = state.transcript
      .map((line) =>
        `<li class="${line.speaker}">` +
        `<b>${line.speaker}:</b> ${escapeHtml(line.text)}</li>`)
      .join('');
    debug.innerHTML = renderDebug(state);
    send.disabled = state.busy || state.ended;
    input.disabled = state.ended;
  };

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = '';
    void controller.sendMessage(text);
  });

  controller.subscribe(render);
  render(controller.view());
}
