/** Timeline model and rendering: events in, HTML out.
 *
 * Pure string rendering so the session view is trivially testable; the DOM
 * layer just swaps innerHTML and wires the approve buttons.
 */

import type { GatewayEvent } from "./api.js";

export interface TimelineItem {
  seq: number;
  kind: GatewayEvent["kind"];
  cycle: number | null;
  html: string;
}

export interface TimelineState {
  items: TimelineItem[];
  /** cycle index -> phase of that cycle so far */
  cycles: Map<number, "planned" | "code" | "running" | "executed" | "failed">;
  done: boolean;
}

export function emptyTimeline(): TimelineState {
  return { items: [], cycles: new Map(), done: false };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const SCRIPT_KEYWORDS = new Set([
  "if", "elif", "else", "while", "for", "in", "and", "or", "not",
  "true", "false", "null",
]);

/** Minimal tokenizer-based highlighter for the experiment script language. */
export function highlightScript(source: string): string {
  const out: string[] = [];
  let i = 0;
  while (i < source.length) {
    const ch = source[i]!;
    if (ch === "#") {
      let j = i;
      while (j < source.length && source[j] !== "\n") j++;
      out.push(`<span class="tok-comment">${escapeHtml(source.slice(i, j))}</span>`);
      i = j;
    } else if (ch === '"') {
      let j = i + 1;
      while (j < source.length && source[j] !== '"' && source[j] !== "\n") {
        if (source[j] === "\\") j++;
        j++;
      }
      j = Math.min(j + 1, source.length);
      out.push(`<span class="tok-string">${escapeHtml(source.slice(i, j))}</span>`);
      i = j;
    } else if (/[0-9]/.test(ch)) {
      let j = i;
      while (j < source.length && /[0-9.eE+\-]/.test(source[j]!)) {
        if ((source[j] === "+" || source[j] === "-") &&
            !/[eE]/.test(source[j - 1] ?? "")) break;
        j++;
      }
      out.push(`<span class="tok-number">${escapeHtml(source.slice(i, j))}</span>`);
      i = j;
    } else if (/[A-Za-z_]/.test(ch)) {
      let j = i;
      while (j < source.length && /[A-Za-z0-9_]/.test(source[j]!)) j++;
      const word = source.slice(i, j);
      if (SCRIPT_KEYWORDS.has(word)) {
        out.push(`<span class="tok-keyword">${word}</span>`);
      } else if (word === "STATE" || word === "SIGNAL") {
        out.push(`<span class="tok-reserved">${word}</span>`);
      } else if (source[j] === "(") {
        out.push(`<span class="tok-call">${word}</span>`);
      } else {
        out.push(escapeHtml(word));
      }
      i = j;
    } else {
      out.push(escapeHtml(ch));
      i++;
    }
  }
  return out.join("");
}

function cycleOf(event: GatewayEvent): number | null {
  const value = event.payload["cycle"];
  return typeof value === "number" ? value : null;
}

export function renderEvent(event: GatewayEvent, mode: string,
                            state: TimelineState): string {
  const p = event.payload;
  switch (event.kind) {
    case "user_input":
      return `<div class="ev ev-input"><b>operator</b> ${escapeHtml(String(p["text"] ?? ""))}</div>`;
    case "query_answer":
      return (
        `<div class="ev ev-answer"><b>Q</b> ${escapeHtml(String(p["query"] ?? ""))}` +
        `<br><b>A</b> ${escapeHtml(String(p["answer"] ?? ""))}</div>`
      );
    case "plan":
      return (
        `<div class="ev ev-plan"><b>plan · cycle ${cycleOf(event)}</b>` +
        `<div class="signal-desc">expects: ${escapeHtml(String(p["signal_description"] ?? ""))}</div>` +
        `<pre class="prompt">${escapeHtml(String(p["prompt"] ?? ""))}</pre></div>`
      );
    case "code": {
      const cycle = cycleOf(event);
      const approvable = mode === "manual";
      const button = approvable
        ? `<button class="approve" data-cycle="${cycle}">approve &amp; run</button>`
        : "";
      return (
        `<div class="ev ev-code" data-cycle="${cycle}"><b>script · cycle ${cycle}</b>${button}` +
        `<pre class="script">${highlightScript(String(p["source"] ?? ""))}</pre></div>`
      );
    }
    case "execution_started":
      return `<div class="ev ev-exec">running cycle ${cycleOf(event)}…</div>`;
    case "signal":
      return (
        `<div class="ev ev-signal"><b>signal · cycle ${cycleOf(event)}</b> ` +
        `${escapeHtml(String(p["value"] ?? ""))}</div>`
      );
    case "error": {
      const err = p["error"] as Record<string, unknown> | undefined;
      const where = err ? ` (${String(err["kind"])} at line ${String(err["line"])})` : "";
      return (
        `<div class="ev ev-error"><b>failed · cycle ${cycleOf(event)}</b>` +
        `${escapeHtml(String(p["signal"] ?? ""))}${escapeHtml(where)}</div>`
      );
    }
    case "done":
      return `<div class="ev ev-done">protocol complete after ${String(p["cycles"])} cycles</div>`;
    case "state_patch":
      return `<div class="ev ev-state">STATE patched: ${escapeHtml(JSON.stringify(p))}</div>`;
    default:
      return `<div class="ev">${escapeHtml(JSON.stringify(event))}</div>`;
  }
}

/** Fold new events into the timeline; returns the items added. */
export function applyEvents(state: TimelineState, events: GatewayEvent[],
                            mode: string): TimelineItem[] {
  const added: TimelineItem[] = [];
  for (const event of events) {
    const cycle = cycleOf(event);
    if (cycle !== null) {
      if (event.kind === "plan") state.cycles.set(cycle, "planned");
      if (event.kind === "code") state.cycles.set(cycle, "code");
      if (event.kind === "execution_started") state.cycles.set(cycle, "running");
      if (event.kind === "signal") state.cycles.set(cycle, "executed");
      if (event.kind === "error") state.cycles.set(cycle, "failed");
    }
    if (event.kind === "done") state.done = true;
    const item: TimelineItem = {
      seq: event.seq,
      kind: event.kind,
      cycle,
      html: renderEvent(event, mode, state),
    };
    state.items.push(item);
    added.push(item);
  }
  return added;
}

/** Cycles whose script is awaiting operator approval (manual mode): code
 * arrived, nothing ran yet. Each exposes exactly one approve control. */
export function pendingCycles(state: TimelineState): number[] {
  const pending: number[] = [];
  for (const [cycle, phase] of state.cycles) {
    if (phase === "code") pending.push(cycle);
  }
  return pending.sort((a, b) => a - b);
}

export function renderTimeline(state: TimelineState): string {
  return state.items.map((item) => item.html).join("\n");
}
