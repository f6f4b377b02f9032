import { api } from './api.js';
import { Store } from './state.js';
import { renderWizard } from './wizard.js';

const root = document.getElementById('app');
if (root) {
  const store = new Store(window.sessionStorage);
  renderWizard(root, store, api);
}
