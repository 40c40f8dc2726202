import { ChatApi } from './api.js';
import { ChatController } from './controller.js';
import { mount } from './ui.js';

const root = document.getElementById('app');
if (root === null) {
  throw new Error('missing #app element');
}

const controller = new ChatController(new ChatApi());
mount(root, controller);
void controller.startConversation();
