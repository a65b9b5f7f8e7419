/** Browser entry point: wires the gateway client to the page. */

import { EventCursor, GatewayClient } from "./api.js";
import { applyEvents, emptyTimeline, renderTimeline } from "./timeline.js";
import { datasetKeys, renderDocList, renderSearchHits, renderState,
         validateNewDoc } from "./kb.js";
import { plotDataset, type LeakageFitParams } from "./plots.js";

const client = new GatewayClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

let currentSession: string | null = null;
let currentMode = "auto";
let cursor: EventCursor | null = null;
let timeline = emptyTimeline();
let polling = false;

async function refreshSessions(): Promise<void> {
  const { sessions } = await client.listSessions();
  const picker = el<HTMLSelectElement>("session-picker");
  picker.innerHTML = sessions
    .map((s) => `<option value="${s.id}">${s.id} (${s.mode}${s.done ? ", done" : ""})</option>`)
    .join("");
  if (currentSession) picker.value = currentSession;
}

async function refreshScenarios(): Promise<void> {
  const { scenarios } = await client.listScenarios();
  el<HTMLSelectElement>("scenario-picker").innerHTML = scenarios
    .map((s) => `<option value="${s}">${s}</option>`)
    .join("");
}

async function openSession(id: string, mode: string): Promise<void> {
  currentSession = id;
  currentMode = mode;
  timeline = emptyTimeline();
  cursor = new EventCursor(client, id);
  el("timeline").innerHTML = "";
  el("session-title").textContent = id;
  if (!polling) void pollLoop();
}

async function pollLoop(): Promise<void> {
  polling = true;
  while (cursor && currentSession) {
    try {
      const events = await cursor.poll(1000);
      if (events.length > 0) {
        applyEvents(timeline, events, currentMode);
        el("timeline").innerHTML = renderTimeline(timeline);
        wireApprovals();
        await refreshStatePanel();
      }
    } catch (err) {
      console.error("poll failed", err);
      await new Promise((resolve) => setTimeout(resolve, 1500));
    }
  }
  polling = false;
}

function wireApprovals(): void {
  const buttons = Array.from(
    el("timeline").querySelectorAll<HTMLButtonElement>("button.approve"));
  for (const button of buttons) {
    if (button.dataset["wired"]) continue;
    button.dataset["wired"] = "1";
    button.addEventListener("click", async () => {
      button.disabled = true;
      try {
        await client.approve(currentSession!, Number(button.dataset["cycle"]));
      } catch (err) {
        button.disabled = false;
        alert(String(err));
      }
    });
  }
}

async function refreshStatePanel(): Promise<void> {
  if (!currentSession) return;
  const { state } = await client.state(currentSession);
  el("state-view").innerHTML = renderState(state);
  const keys = datasetKeys(state);
  el("plot-picker").innerHTML = keys
    .map((k) => `<option value="${String(state[k])}">${k}</option>`)
    .join("");
  const fit = state["leakage_fit"] as LeakageFitParams | undefined;
  if (keys.length > 0) {
    await showPlot(String(state[keys[keys.length - 1]!]), fit);
  }
}

async function showPlot(path: string, fit?: LeakageFitParams): Promise<void> {
  try {
    const rel = path.includes("/") ? path.split("/").slice(-2).join("/") : path;
    const dataset = await client.dataset(rel);
    el("plot-view").innerHTML = plotDataset(dataset, fit);
  } catch (err) {
    el("plot-view").innerHTML = `<p class="error">plot failed: ${String(err)}</p>`;
  }
}

async function refreshDocs(): Promise<void> {
  const { docs } = await client.listDocs();
  el("kb-list").innerHTML = renderDocList(docs);
}

function wire(): void {
  el<HTMLButtonElement>("create-session").addEventListener("click", async () => {
    const scenario = el<HTMLSelectElement>("scenario-picker").value;
    const mode = el<HTMLSelectElement>("mode-picker").value;
    const seed = Number(el<HTMLInputElement>("seed-input").value || "0");
    const { id } = await client.createSession({
      mode,
      model_ref: `scripted:${scenario}`,
      seed,
    });
    await refreshSessions();
    await openSession(id, mode);
  });

  el<HTMLSelectElement>("session-picker").addEventListener("change", async (ev) => {
    const id = (ev.target as HTMLSelectElement).value;
    const { sessions } = await client.listSessions();
    const info = sessions.find((s) => s.id === id);
    await openSession(id, info?.mode ?? "auto");
  });

  const box = el<HTMLInputElement>("command-box");
  const send = el<HTMLButtonElement>("command-send");
  const updateDisabled = () => {
    send.disabled = box.value.trim() === "" || currentSession === null;
  };
  box.addEventListener("input", updateDisabled);
  updateDisabled();
  send.addEventListener("click", async () => {
    if (!currentSession || box.value.trim() === "") return;
    const text = box.value;
    box.value = "";
    updateDisabled();
    await client.postInput(currentSession, text);
  });

  el<HTMLButtonElement>("kb-refresh").addEventListener("click", refreshDocs);
  el<HTMLButtonElement>("kb-search-run").addEventListener("click", async () => {
    const task = el<HTMLInputElement>("kb-search-box").value;
    if (!task.trim()) return;
    const { results } = await client.searchDocs(task);
    el("kb-hits").innerHTML = renderSearchHits(results);
  });
  el<HTMLButtonElement>("kb-add-run").addEventListener("click", async () => {
    const doc = {
      id: el<HTMLInputElement>("kb-add-id").value,
      title: el<HTMLInputElement>("kb-add-title").value,
      kind: el<HTMLSelectElement>("kb-add-kind").value,
      body: el<HTMLTextAreaElement>("kb-add-body").value,
    };
    const problem = validateNewDoc(doc);
    if (problem) {
      el("kb-add-status").textContent = problem;
      return;
    }
    try {
      await client.addDoc(doc);
      el("kb-add-status").textContent = `added ${doc.id}`;
      await refreshDocs();
    } catch (err) {
      el("kb-add-status").textContent = String(err);
    }
  });

  el<HTMLButtonElement>("memorize-run").addEventListener("click", async () => {
    if (!currentSession) return;
    const step = Number(el<HTMLInputElement>("memorize-step").value || "1");
    const title = el<HTMLInputElement>("memorize-title").value || "Memorized step";
    try {
      const { doc_id } = await client.memorize(currentSession, step, title);
      el("memorize-status").textContent = `stored as ${doc_id}`;
      await refreshDocs();
    } catch (err) {
      el("memorize-status").textContent = String(err);
    }
  });

  el<HTMLSelectElement>("plot-picker").addEventListener("change", async (ev) => {
    await showPlot((ev.target as HTMLSelectElement).value);
  });
}

void (async () => {
  wire();
  await refreshScenarios();
  await refreshSessions();
  await refreshDocs();
})();
