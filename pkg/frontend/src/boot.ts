/** Browser entry point; tests import main.ts directly instead. */

import { boot } from "./main.js";

const root = document.getElementById("chat-root");
if (root) {
  boot(root, { storage: window.sessionStorage });
}
