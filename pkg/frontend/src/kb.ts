/** Knowledge-base browser rendering and the STATE inspector. */

import type { DocSummary, SearchHit } from "./api.js";
import { escapeHtml } from "./timeline.js";

export function renderDocList(docs: DocSummary[]): string {
  if (docs.length === 0) return `<p class="empty">knowledge base is empty</p>`;
  const rows = docs
    .map(
      (d) =>
        `<tr><td class="doc-id">${escapeHtml(d.id)}</td>` +
        `<td><span class="kind kind-${d.kind}">${d.kind}</span></td>` +
        `<td>${escapeHtml(d.title)}</td>` +
        `<td class="refs">${d.refs.map(escapeHtml).join(", ")}</td></tr>`,
    )
    .join("");
  return `<table class="docs"><thead><tr><th>id</th><th>kind</th><th>title</th><th>refs</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderSearchHits(hits: SearchHit[]): string {
  if (hits.length === 0) return `<p class="empty">no matches</p>`;
  return (
    `<ol class="hits">` +
    hits
      .map(
        (h) =>
          `<li><span class="score">${h.score.toFixed(3)}</span> ` +
          `<span class="doc-id">${escapeHtml(h.id)}</span> ${escapeHtml(h.title)}</li>`,
      )
      .join("") +
    `</ol>`
  );
}

export function validateNewDoc(doc: {
  id: string;
  title: string;
  body: string;
}): string | null {
  if (!doc.id.trim()) return "document id is required";
  if (/[\s/]/.test(doc.id)) return "document id must not contain spaces or /";
  if (!doc.title.trim()) return "title is required";
  if (!doc.body.trim()) return "body must not be empty";
  return null;
}

export function renderState(state: Record<string, unknown>): string {
  const keys = Object.keys(state).sort();
  if (keys.length === 0) return `<p class="empty">STATE is empty</p>`;
  const rows = keys
    .map((key) => {
      const rendered = JSON.stringify(state[key]);
      const shown =
        rendered.length > 400 ? rendered.slice(0, 400) + "…" : rendered;
      return (
        `<tr><td class="state-key">${escapeHtml(key)}</td>` +
        `<td><code>${escapeHtml(shown)}</code></td></tr>`
      );
    })
    .join("");
  return `<table class="state"><tbody>${rows}</tbody></table>`;
}

/** Dataset paths referenced from STATE (the *_file convention). */
export function datasetKeys(state: Record<string, unknown>): string[] {
  return Object.keys(state)
    .filter((k) => k.endsWith("_file") && typeof state[k] === "string")
    .sort();
}
