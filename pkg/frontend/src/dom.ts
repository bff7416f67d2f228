/** Thin DOM layer: renders the pure view-models and wires events back to
 * session actions. Browser-only; all logic worth testing lives in
 * session.ts and views.ts. */

import type { WorkbenchSession } from "./session.js";
import type { Indicator } from "./types.js";
import { gateTrackerView, matrixView, weightConsoleView, UNAVAILABLE } from "./views.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function renderMatrix(session: WorkbenchSession, root: HTMLElement): void {
  const view = matrixView(session.snapshot());
  root.replaceChildren();
  const header = el(
    "tr",
    {},
    el("th", {}, "alternative"),
    ...view.columns.map((column) => el("th", {}, column.label)),
    el("th", {}, "A"),
    el("th", {}, "rank"),
    el("th", {}, "verdict"),
  );
  const rows = view.rows.map((row) => {
    const cells = row.cells.map((cell) => {
      if (!cell.editable) return el("td", { class: "na" }, UNAVAILABLE);
      const input = el("input", {
        type: "number",
        min: "1",
        max: "5",
        step: "0.5",
        value: String(cell.value),
        "data-use": row.useId,
        "data-indicator": cell.indicator,
      });
      input.addEventListener("change", () => {
        void session
          .editScore(row.useId, cell.indicator as Indicator, Number(input.value))
          .catch(() => undefined); // validation errors render inline below
      });
      const td = el("td", cell.error ? { class: "cell-error", title: cell.error } : {}, input);
      if (cell.error) td.append(el("div", { class: "error-note" }, cell.error));
      return td;
    });
    const badge = row.excluded
      ? el(
          "span",
          { class: "badge excluded", title: row.badges.map((b) => b.detail).join("\n") },
          `excluded: ${row.badges.map((b) => b.code).join(", ")}`,
        )
      : el("span", { class: `badge ${row.classification ?? "pending"}` },
          row.classification ?? UNAVAILABLE);
    return el(
      "tr",
      {},
      el("td", { class: "label" }, row.label),
      ...cells,
      el("td", {}, row.attractiveness),
      el("td", {}, row.rank === null ? UNAVAILABLE : String(row.rank)),
      el("td", {}, badge),
    );
  });
  root.append(el("table", { class: view.stale ? "stale" : "" }, header, ...rows));
  if (!view.available) {
    root.append(el("p", { class: "offline" }, "service unavailable - derived values withheld"));
  }
}

function renderConsole(session: WorkbenchSession, root: HTMLElement): void {
  const view = weightConsoleView(session.snapshot());
  root.replaceChildren();
  for (const slider of view.sliders) {
    const input = el("input", {
      type: "range",
      min: String(slider.min),
      max: String(slider.max),
      step: String(slider.step),
      value: String(slider.value),
      "data-weight": slider.name,
    });
    input.addEventListener("change", () => {
      const value = Number(input.value);
      const action = slider.constrained
        ? session.setMixWeight(slider.name as "beta" | "gamma" | "delta", value)
        : session.setWeight(slider.name as "w_value", value);
      void action.catch(() => undefined);
    });
    root.append(
      el("label", { class: "slider" }, `${slider.name} = ${slider.value.toFixed(2)} `, input),
    );
  }
  const presetBox = el("div", { class: "presets" });
  for (const preset of view.presets) {
    const button = el(
      "button",
      { class: preset.selected ? "selected" : "" },
      preset.name,
    );
    button.addEventListener("click", () => void session.applyPreset(preset.name));
    presetBox.append(button);
  }
  const sweepButton = el("button", {}, "sweep w_risk");
  sweepButton.addEventListener("click", () => void session.runSweep());
  presetBox.append(sweepButton);
  root.append(presetBox);

  const ranking = el("ol", { class: "ranking" });
  for (const entry of view.ranking) {
    ranking.append(el("li", {}, `${entry.label} (A=${entry.attractiveness})`));
  }
  root.append(ranking);

  if (view.sweep) {
    const sweep = el("div", { class: "sweep" });
    sweep.append(
      el("p", {}, `${view.sweep.evaluatedPoints} weightings; flips: ` +
        (view.sweep.flips.join(", ") || "none")),
    );
    for (const entry of view.sweep.perUse) {
      const bar = el("div", { class: "stack", "data-use": entry.useId });
      for (const name of ["pass", "borderline", "exclude"] as const) {
        const segment = el("span", { class: `seg ${name}` });
        segment.style.width = `${(entry.fractions[name] * 100).toFixed(1)}%`;
        bar.append(segment);
      }
      sweep.append(el("div", {}, entry.useId, bar));
    }
    root.append(sweep);
  }
}

function renderGates(session: WorkbenchSession, root: HTMLElement): void {
  const view = gateTrackerView(session.snapshot());
  root.replaceChildren();
  if (view.notice) root.append(el("p", { class: "notice" }, view.notice));
  const lane = el("div", { class: "stages" });
  for (const stage of view.stages) {
    lane.append(el("span", { class: `stage ${stage.status}` }, stage.id));
  }
  root.append(lane);
  if (!view.open) {
    const openButton = el("button", {}, "open project");
    openButton.addEventListener("click", () => void session.openProject());
    root.append(openButton);
    return;
  }
  if (view.frozen) {
    root.append(el("p", { class: "frozen" }, "project stopped - history is read-only"));
  }
  const list = el("ul", { class: "checklist" });
  for (const item of view.checklist) {
    const box = el("input", { type: "checkbox", "data-check": item.id });
    (box as HTMLInputElement).checked = item.checked;
    box.addEventListener("change", () =>
      session.setCheck(item.id, (box as HTMLInputElement).checked),
    );
    list.append(el("li", {}, box, ` ${item.id}`,
      item.checked ? "" : el("em", { class: "would-stop" }, ` -> ${item.failureCode}`)));
  }
  root.append(list);
  const proceed = el("button", { class: "proceed" }, "record gate");
  (proceed as HTMLButtonElement).disabled = !view.proceedEnabled;
  proceed.addEventListener("click", () => void session.submitGate());
  root.append(proceed);
  if (view.stopOffered) {
    const stop = el("button", { class: "stop" }, `record stop (${view.stopCodes.join(", ")})`);
    stop.addEventListener("click", () => void session.submitGate());
    root.append(stop);
  }
  if (view.notice) {
    const reload = el("button", {}, "reload");
    reload.addEventListener("click", () => void session.reloadProject());
    root.append(reload);
  }
  root.append(el("p", {}, `candidates: ${view.candidates.join(", ") || UNAVAILABLE}`));
}

export function mount(session: WorkbenchSession, container: HTMLElement): void {
  const matrix = el("section", { id: "matrix" });
  const console_ = el("section", { id: "console" });
  const gates = el("section", { id: "gates" });
  container.append(
    el("h2", {}, "Decision matrix"), matrix,
    el("h2", {}, "Weight console"), console_,
    el("h2", {}, "Stage gates"), gates,
  );
  const render = () => {
    renderMatrix(session, matrix);
    renderConsole(session, console_);
    renderGates(session, gates);
  };
  session.subscribe(render);
  render();
}
