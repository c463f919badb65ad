/** Conversation wiring: one session per page, requests serialized. */

import { ServiceClient } from "./api.js";
import { renderError, renderTurn } from "./render.js";
import { turnView } from "./viewmodel.js";

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? window.location.origin;
}

async function start(): Promise<void> {
  const client = new ServiceClient(baseUrl());
  const conversation = document.getElementById("conversation")!;
  const form = document.getElementById("ask-form") as HTMLFormElement;
  const input = document.getElementById("ask-input") as HTMLInputElement;
  const resetButton = document.getElementById("reset")!;

  let sessionId = (await client.createSession()).session_id;
  let busy = false;

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || busy) return;
    busy = true;
    input.disabled = true;
    try {
      const payload = await client.postUtterance(sessionId, text);
      conversation.appendChild(renderTurn(turnView(payload)));
      input.value = "";
    } catch (error) {
      conversation.appendChild(renderError(String(error)));
    } finally {
      busy = false;
      input.disabled = false;
      input.focus();
      conversation.scrollTop = conversation.scrollHeight;
    }
  });

  resetButton.addEventListener("click", async () => {
    try {
      await client.deleteSession(sessionId);
    } catch {
      // the session may already be gone; a fresh one is created either way
    }
    sessionId = (await client.createSession()).session_id;
    conversation.replaceChildren();
    input.focus();
  });
}

start().catch((error) => {
  document.body.appendChild(renderError(`service unreachable: ${error}`));
});
