/**
 * HTML renderers for the console screens. Pure string producers: no DOM
 * access, no fetches, no math on the numbers they are handed. Interactive
 * elements carry data-action attributes that the bootstrap wires up.
 */

import type { AttributeInfo, DatasetRecord } from "./api.js";
import type { SessionViewModel } from "./viewmodel.js";
import { formatBits } from "./viewmodel.js";

export interface Banner {
  kind: "info" | "conflict" | "error" | "inconsistent";
  text: string;
}

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function escapeAttr(value: string): string {
  return escapeHtml(value);
}

function bannerHtml(banner: Banner | null): string {
  if (!banner) return "";
  return `<div class="banner banner-${banner.kind}" data-role="banner">${escapeHtml(banner.text)}</div>`;
}

// ── dataset picker ──────────────────────────────────────────────────────────

export function renderPicker(datasets: DatasetRecord[], banner: Banner | null): string {
  const rows = datasets
    .map(
      (d) => `<tr>
  <td><code>${escapeHtml(d.dataset_id)}</code></td>
  <td>${escapeHtml(d.name)}</td>
  <td class="num">${d.n_objects}</td>
  <td class="num">${d.n_attributes}</td>
  <td><button data-action="choose-dataset" data-dataset="${escapeAttr(d.dataset_id)}">open</button></td>
</tr>`,
    )
    .join("\n");
  const empty = datasets.length === 0 ? `<p class="hint">No datasets yet. Upload a CSV to begin.</p>` : "";
  return `<section class="screen screen-picker">
${bannerHtml(banner)}
<h1>Choose a dataset</h1>
${empty}
<table class="datasets"><thead><tr><th>id</th><th>name</th><th>objects</th><th>attributes</th><th></th></tr></thead>
<tbody>${rows}</tbody></table>
<form data-role="upload-form">
  <h2>Upload CSV</h2>
  <input type="text" name="name" placeholder="dataset name" required>
  <textarea name="csv" rows="6" placeholder="object_id,attr1,attr2\n..." required></textarea>
  <button type="submit" data-action="upload">upload</button>
</form>
</section>`;
}

// ── known-attributes form ───────────────────────────────────────────────────

export function renderKnownsForm(
  dataset: DatasetRecord,
  draft: Record<string, string>,
  banner: Banner | null,
): string {
  const fields = dataset.attributes
    .map((attr) => {
      const options = attr.values
        .map((v) => {
          const sel = draft[attr.name] === v ? " selected" : "";
          return `<option value="${escapeAttr(v)}"${sel}>${escapeHtml(v)}</option>`;
        })
        .join("");
      return `<label class="known-field">${escapeHtml(attr.name)}
  <select data-action="set-known" data-attr="${escapeAttr(attr.name)}">
    <option value="">unknown</option>${options}
  </select>
</label>`;
    })
    .join("\n");
  return `<section class="screen screen-knowns">
${bannerHtml(banner)}
<h1>Seed the session</h1>
<p class="hint">Dataset <code>${escapeHtml(dataset.dataset_id)}</code> (${escapeHtml(dataset.name)}). Pick any values already known, then start tracing.</p>
<div class="knowns-grid">${fields}</div>
<button data-action="open-session">start session</button>
<button data-action="back-to-picker">back</button>
</section>`;
}

// ── session dashboard ───────────────────────────────────────────────────────

function gaugeHtml(vm: SessionViewModel): string {
  const bits = vm.entropyBits;
  const scale = vm.initialEntropyBits;
  let percent = 0;
  if (bits !== null && scale !== null && scale > 0) {
    percent = Math.max(0, Math.min(100, (bits / scale) * 100));
  }
  return `<div class="gauge">
  <div class="gauge-bar"><div class="gauge-fill" style="width: ${percent.toFixed(1)}%"></div></div>
  <div class="gauge-value" data-role="entropy-bits">${formatBits(bits)} bits</div>
  <div class="gauge-count">candidates: <span data-role="candidate-count">${vm.candidateCount}</span></div>
</div>`;
}

function knownsHtml(vm: SessionViewModel): string {
  const entries = Object.entries(vm.known);
  if (entries.length === 0) return "";
  const items = entries
    .map(([attr, value]) => `<li><code>${escapeHtml(attr)}</code> = ${escapeHtml(value)}</li>`)
    .join("");
  return `<div class="knowns"><h3>Known at start</h3><ul>${items}</ul></div>`;
}

function timelineHtml(vm: SessionViewModel, withRollback: boolean): string {
  if (vm.timeline.length === 0) {
    return `<p class="hint">No observations yet.</p>`;
  }
  const items = vm.timeline
    .map((step, i) => {
      const rollback = withRollback
        ? ` <button data-action="rollback" data-keep="${i}">roll back to before this</button>`
        : "";
      return `<li class="path-step">
  <code>${escapeHtml(step.attribute)}</code> = ${escapeHtml(step.value)}
  <span class="after" data-role="entropy-after">${formatBits(step.entropyAfter)} bits after</span>${rollback}
</li>`;
    })
    .join("\n");
  return `<ol class="timeline">${items}</ol>`;
}

function whatIfHtml(row: SessionViewModel["recommendations"][0]): string {
  const lines = row.whatIf
    .map(
      (w) => `<li class="whatif-row">
  <span class="wvalue">${escapeHtml(w.value)}</span>
  <span class="wcount" data-role="whatif-count">${w.count}</span>
  <button data-action="observe" data-attr="${escapeAttr(row.attribute)}" data-value="${escapeAttr(w.value)}">record</button>
</li>`,
    )
    .join("\n");
  return `<ul class="whatif" data-role="whatif">${lines}</ul>`;
}

function recommendationsHtml(vm: SessionViewModel, whatIfOpen: string | null): string {
  if (vm.recommendations.length === 0) {
    return "";
  }
  const rows = vm.recommendations
    .map((row) => {
      const star = row.attribute === vm.chosen ? `<span class="chosen" title="recommended next">next</span>` : "";
      const open = whatIfOpen === row.attribute;
      const popover = open ? whatIfHtml(row) : "";
      return `<li class="rec-row${open ? " open" : ""}">
  <button data-action="toggle-whatif" data-attr="${escapeAttr(row.attribute)}">
    <code>${escapeHtml(row.attribute)}</code>
    <span class="bits" data-role="rec-bits">${formatBits(row.bits)} bits</span>
    ${star}
  </button>
  ${popover}
</li>`;
    })
    .join("\n");
  return `<div class="recommendations">
<h3>Ask next</h3>
<p class="hint">Ranked by expected information. Open a row to preview how each answer would split the candidates, then record the observed value.</p>
<ul>${rows}</ul>
</div>`;
}

function survivorsHtml(vm: SessionViewModel, attributes: AttributeInfo[]): string {
  if (!vm.survivors) return "";
  const names = attributes.map((a) => a.name);
  const head = names.map((n) => `<th>${escapeHtml(n)}</th>`).join("");
  const rows = vm.survivors
    .map((row) => {
      const cells = names
        .map((n) => {
          const v = row.values[n];
          return `<td>${v === null || v === undefined ? `<span class="missing">?</span>` : escapeHtml(v)}</td>`;
        })
        .join("");
      return `<tr><td><code>${escapeHtml(row.object_id)}</code></td>${cells}</tr>`;
    })
    .join("\n");
  return `<div class="survivors">
<h3>Remaining candidates</h3>
<table><thead><tr><th>object</th>${head}</tr></thead><tbody>${rows}</tbody></table>
</div>`;
}

export function renderDashboard(
  vm: SessionViewModel,
  dataset: DatasetRecord,
  banner: Banner | null,
  whatIfOpen: string | null,
): string {
  const inconsistent = vm.status === "inconsistent";
  const statusBanner = inconsistent
    ? bannerHtml({
        kind: "inconsistent",
        text: "The recorded observations contradict each other: no candidate matches. Roll back to an earlier step and retry.",
      })
    : "";
  return `<section class="screen screen-dashboard" data-status="${escapeAttr(vm.status)}">
${bannerHtml(banner)}
${statusBanner}
<header class="session-head">
  <h1>Tracing session</h1>
  <p class="hint">session <code>${escapeHtml(vm.sessionId)}</code> on <code>${escapeHtml(dataset.dataset_id)}</code> (${escapeHtml(dataset.name)}), revision ${vm.revision}, status <strong data-role="status">${escapeHtml(vm.status)}</strong></p>
  <button data-action="refresh">refresh</button>
  <button data-action="end-session">end session</button>
</header>
${gaugeHtml(vm)}
${recommendationsHtml(vm, whatIfOpen)}
<div class="path">
  <h3>Trace path</h3>
  ${knownsHtml(vm)}
  ${timelineHtml(vm, true)}
</div>
${survivorsHtml(vm, dataset.attributes)}
</section>`;
}

// ── identification screen ───────────────────────────────────────────────────

export function renderIdentified(
  vm: SessionViewModel,
  dataset: DatasetRecord,
  banner: Banner | null,
): string {
  const objectId = vm.identifiedObject ?? "";
  return `<section class="screen screen-identified">
${bannerHtml(banner)}
<h1>Identified</h1>
<p class="result">The observations identify <strong data-role="identified-object">${escapeHtml(objectId)}</strong> uniquely.</p>
<div class="gauge-count">candidates: <span data-role="candidate-count">${vm.candidateCount}</span>, entropy <span data-role="entropy-bits">${formatBits(vm.entropyBits)} bits</span></div>
<div class="path">
  <h3>How it was traced</h3>
  ${knownsHtml(vm)}
  ${timelineHtml(vm, false)}
</div>
${survivorsHtml(vm, dataset.attributes)}
<button data-action="new-session">trace another</button>
<button data-action="back-to-picker">datasets</button>
</section>`;
}
