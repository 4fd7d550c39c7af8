// View builders. Each takes the document plus the API client and returns its
// root element along with the hooks the router (and tests) drive it through.
// All state shown always derives from the latest successful API response.

import { ApiClient, ApiError } from "./api.js";
import { lossChartSvg, probabilityBars } from "./charts.js";
import { duration, metricSummary, percent, statusClass, typeLabel } from "./format.js";
import { buildFields, collectRow, FieldSpec } from "./forms.js";
import { startPolling, PollHandle } from "./poll.js";
import { Databag, isTerminal, SemanticType, Solution } from "./types.js";

export interface Ctx {
  doc: Document;
  api: ApiClient;
  navigate: (hash: string) => void;
  pollIntervalMs?: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child as Node | string);
  }
  return node;
}

function errorBox(doc: Document): HTMLElement {
  return el(doc, "div", { class: "error-box", hidden: "hidden" });
}

function showError(box: HTMLElement, err: unknown): void {
  const message = err instanceof ApiError ? `${err.message}` : String(err);
  box.textContent = message;
  box.removeAttribute("hidden");
}

function clearError(box: HTMLElement): void {
  box.textContent = "";
  box.setAttribute("hidden", "hidden");
}

// --- upload wizard -----------------------------------------------------------

export interface UploadWizard {
  element: HTMLElement;
  setFile(file: File | null): void;
  setName(name: string): void;
  submit(): Promise<void>;
}

export function uploadWizard(ctx: Ctx, onCreated: (bag: Databag) => void): UploadWizard {
  const { doc, api } = ctx;
  let selected: File | null = null;

  const nameInput = el(doc, "input", {
    type: "text",
    placeholder: "Dataset name",
    class: "name-input",
  });
  const fileInput = el(doc, "input", { type: "file", accept: ".csv,text/csv" });
  const submitBtn = el(doc, "button", { class: "primary", disabled: "disabled" }, [
    "Upload",
  ]);
  const errors = errorBox(doc);

  const refresh = () => {
    if (selected) submitBtn.removeAttribute("disabled");
    else submitBtn.setAttribute("disabled", "disabled");
  };

  fileInput.addEventListener("change", () => {
    selected = fileInput.files?.[0] ?? null;
    if (selected && !nameInput.value) {
      nameInput.value = selected.name.replace(/\.csv$/i, "");
    }
    refresh();
  });

  const wizard: UploadWizard = {
    element: el(doc, "section", { class: "card upload-wizard" }, [
      el(doc, "h2", {}, ["Upload data"]),
      el(doc, "p", {}, ["Pick a CSV file with one header row. Column types are detected for you."]),
      el(doc, "div", { class: "field-row" }, [nameInput, fileInput, submitBtn]),
      errors,
    ]),
    setFile(file: File | null) {
      selected = file;
      if (file && !nameInput.value) nameInput.value = file.name.replace(/\.csv$/i, "");
      refresh();
    },
    setName(name: string) {
      nameInput.value = name;
    },
    async submit() {
      if (!selected) return;
      clearError(errors);
      try {
        const bag = await api.uploadDatabag(nameInput.value || selected.name, selected);
        onCreated(bag);
      } catch (err) {
        showError(errors, err);
      }
    },
  };
  submitBtn.addEventListener("click", () => void wizard.submit());
  return wizard;
}

// --- schema review + train wizard ------------------------------------------------

export interface TrainWizard {
  element: HTMLElement;
  selectTarget(name: string): void;
  overriddenTypes(): Record<string, SemanticType>;
  train(): Promise<void>;
}

export function trainWizard(
  ctx: Ctx,
  databag: Databag,
  onStarted: (solution: Solution) => void,
): TrainWizard {
  const { doc, api } = ctx;
  const typeSelects = new Map<string, HTMLSelectElement>();

  const header = el(doc, "tr", {}, [
    el(doc, "th", {}, ["Column"]),
    el(doc, "th", {}, ["Type"]),
    el(doc, "th", {}, ["Distinct values"]),
    el(doc, "th", {}, ["Missing"]),
  ]);
  const tbody = el(doc, "tbody");
  for (const col of databag.columns) {
    const select = el(doc, "select", { class: "type-select", "data-column": col.name });
    for (const t of ["number", "category", "binary", "text"] as SemanticType[]) {
      const opt = el(doc, "option", { value: t }, [typeLabel(t)]);
      if (t === col.detected_type) opt.setAttribute("selected", "selected");
      select.append(opt);
    }
    select.value = col.detected_type;
    typeSelects.set(col.name, select);
    tbody.append(
      el(doc, "tr", {}, [
        el(doc, "td", { class: "col-name" }, [col.name]),
        el(doc, "td", {}, [select]),
        el(doc, "td", {}, [String(col.distinct_count)]),
        el(doc, "td", {}, [String(col.num_missing)]),
      ]),
    );
  }
  const schemaTable = el(doc, "table", { class: "schema-table" }, [
    el(doc, "thead", {}, [header]),
    tbody,
  ]);

  const targetSelect = el(doc, "select", { class: "target-select" });
  targetSelect.append(el(doc, "option", { value: "" }, ["Choose a column to predict…"]));
  for (const col of databag.columns) {
    const opt = el(doc, "option", { value: col.name }, [
      `${col.name} (${typeLabel(col.detected_type)})`,
    ]);
    if (col.detected_type === "text") {
      opt.setAttribute("disabled", "disabled");
      opt.setAttribute("title", "Text columns cannot be predicted");
    }
    targetSelect.append(opt);
  }

  const solutionName = el(doc, "input", {
    type: "text",
    placeholder: "Model name (optional)",
    class: "name-input",
  });
  const trainBtn = el(doc, "button", { class: "primary", disabled: "disabled" }, ["Train"]);
  const errors = errorBox(doc);

  targetSelect.addEventListener("change", () => {
    if (targetSelect.value) trainBtn.removeAttribute("disabled");
    else trainBtn.setAttribute("disabled", "disabled");
  });

  const wizard: TrainWizard = {
    element: el(doc, "section", { class: "card train-wizard" }, [
      el(doc, "h2", {}, [`Review ${databag.name}`]),
      el(doc, "p", {}, [
        `${databag.row_count} rows. Check the detected types, then pick what to predict.`,
      ]),
      schemaTable,
      el(doc, "div", { class: "field-row" }, [targetSelect, solutionName, trainBtn]),
      errors,
    ]),
    selectTarget(name: string) {
      targetSelect.value = name;
      trainBtn.removeAttribute("disabled");
    },
    overriddenTypes() {
      const overrides: Record<string, SemanticType> = {};
      for (const col of databag.columns) {
        const chosen = typeSelects.get(col.name)!.value as SemanticType;
        if (chosen !== col.detected_type) overrides[col.name] = chosen;
      }
      return overrides;
    },
    async train() {
      const target = targetSelect.value;
      if (!target) return;
      clearError(errors);
      const typeOverrides = wizard.overriddenTypes();
      const req: Parameters<ApiClient["createSolution"]>[0] = {
        databag_id: databag.id,
        target,
        name: solutionName.value,
      };
      const overriddenInputs = Object.entries(typeOverrides).filter(([name]) => name !== target);
      if (overriddenInputs.length > 0) {
        req.overrides = {
          input_features: databag.columns
            .filter((c) => c.name !== target)
            .map((c) =>
              typeOverrides[c.name]
                ? { name: c.name, type: typeOverrides[c.name] }
                : c.name,
            ),
        };
      }
      try {
        const solution = await api.createSolution(req);
        onStarted(solution);
      } catch (err) {
        showError(errors, err);
      }
    },
  };
  trainBtn.addEventListener("click", () => void wizard.train());
  return wizard;
}

// --- run monitor ---------------------------------------------------------------------

export interface RunMonitor {
  element: HTMLElement;
  stop(): void;
  current(): Solution | null;
  settled: Promise<Solution>;
}

export function runMonitor(ctx: Ctx, solutionId: string): RunMonitor {
  const { doc, api } = ctx;
  const title = el(doc, "h2", {}, ["Training…"]);
  const statusLine = el(doc, "p", { class: "status-line" });
  const stepsBody = el(doc, "tbody");
  const metricsPanel = el(doc, "div", { class: "metrics-panel", hidden: "hidden" });
  const configPanel = el(doc, "details", { class: "advanced" }, [
    el(doc, "summary", {}, ["Advanced: generated configuration"]),
    el(doc, "pre", { class: "config-doc" }),
  ]);
  const element = el(doc, "section", { class: "card run-monitor" }, [
    title,
    statusLine,
    el(doc, "table", { class: "steps-table" }, [
      el(doc, "thead", {}, [
        el(doc, "tr", {}, [
          el(doc, "th", {}, ["Step"]),
          el(doc, "th", {}, ["Status"]),
          el(doc, "th", {}, ["Attempts"]),
          el(doc, "th", {}, ["Duration"]),
        ]),
      ]),
      stepsBody,
    ]),
    metricsPanel,
    configPanel,
  ]);

  let latest: Solution | null = null;
  let resolveSettled: (s: Solution) => void;
  const settled = new Promise<Solution>((resolve) => {
    resolveSettled = resolve;
  });

  const render = (solution: Solution) => {
    latest = solution;
    title.textContent = solution.name;
    statusLine.textContent = solution.status;
    statusLine.className = `status-line ${statusClass(solution.status)}`;

    stepsBody.replaceChildren();
    for (const step of solution.steps) {
      const row = el(doc, "tr", { class: statusClass(step.status), "data-step": step.id }, [
        el(doc, "td", {}, [step.id]),
        el(doc, "td", { class: "step-status" }, [step.status]),
        el(doc, "td", {}, [String(step.attempts)]),
        el(doc, "td", {}, [duration(step.started_at, step.finished_at)]),
      ]);
      if (step.status === "Failed" && step.error_message) {
        row.setAttribute("title", step.error_message);
      }
      stepsBody.append(row);
    }

    const failed = solution.steps.find((s) => s.status === "Failed");
    if (solution.status === "Failed" && failed) {
      statusLine.textContent = `Failed at ${failed.id}: ${failed.error_message ?? "unknown error"}`;
    }

    const pre = configPanel.querySelector("pre")!;
    pre.textContent = solution.config ?? "(not generated yet)";

    if (solution.status === "Succeeded" && solution.metrics) {
      metricsPanel.removeAttribute("hidden");
      metricsPanel.replaceChildren(
        el(doc, "h3", {}, ["Results"]),
        el(doc, "p", { class: "metric-headline" }, [metricSummary(solution.metrics.test)]),
        el(doc, "div", { class: "chart-holder" }),
        el(doc, "button", { class: "primary goto-playground" }, ["Try predictions"]),
      );
      metricsPanel.querySelector(".chart-holder")!.innerHTML = lossChartSvg(
        solution.metrics.loss_per_epoch,
      );
      metricsPanel
        .querySelector(".goto-playground")!
        .addEventListener("click", () => ctx.navigate(`#/solutions/${solution.id}/predict`));
    }
  };

  const handle: PollHandle = startPolling(
    () => api.getSolution(solutionId),
    (solution) => {
      render(solution);
      if (isTerminal(solution.status)) resolveSettled(solution);
    },
    (solution) => isTerminal(solution.status),
    ctx.pollIntervalMs ?? 2000,
  );

  return {
    element,
    stop: () => handle.stop(),
    current: () => latest,
    settled,
  };
}

// --- prediction playground ---------------------------------------------------------------

export interface Playground {
  element: HTMLElement;
  setValue(name: string, value: unknown): void;
  submit(): Promise<void>;
  lastBars(): { label: string; pct: number }[];
}

export function playground(ctx: Ctx, solution: Solution, databag: Databag): Playground {
  const { doc, api } = ctx;
  const fields = buildFields(databag, solution.target);
  const controls = new Map<string, HTMLElement>();
  const values: Record<string, unknown> = {};

  const fieldRows: HTMLElement[] = [];
  for (const field of fields) {
    const control = makeControl(doc, field, (v) => {
      values[field.name] = v;
    });
    controls.set(field.name, control.element);
    values[field.name] = control.initial;
    fieldRows.push(
      el(doc, "label", { class: `field field-${field.kind}`, "data-field": field.name }, [
        el(doc, "span", { class: "field-name" }, [field.name]),
        control.element,
        el(doc, "span", { class: "field-error" }),
      ]),
    );
  }

  const predictBtn = el(doc, "button", { class: "primary" }, ["Predict"]);
  const resultPanel = el(doc, "div", { class: "result-panel", hidden: "hidden" });
  const errors = errorBox(doc);
  let bars: { label: string; pct: number }[] = [];

  const view: Playground = {
    element: el(doc, "section", { class: "card playground" }, [
      el(doc, "h2", {}, [`Predict ${solution.target}`]),
      el(doc, "form", { class: "predict-form" }, [...fieldRows, predictBtn]),
      errors,
      resultPanel,
    ]),
    setValue(name, value) {
      values[name] = value;
    },
    async submit() {
      clearError(errors);
      const { row, errors: fieldErrors } = collectRow(fields, values);
      for (const fieldRow of fieldRows) {
        const name = fieldRow.getAttribute("data-field")!;
        fieldRow.querySelector(".field-error")!.textContent = fieldErrors[name] ?? "";
      }
      if (Object.keys(fieldErrors).length > 0) return;
      try {
        const { predictions } = await api.predict(solution.id, [row]);
        const prediction = predictions[0];
        bars = prediction.probabilities ? probabilityBars(prediction.probabilities) : [];
        resultPanel.removeAttribute("hidden");
        resultPanel.replaceChildren(
          el(doc, "p", { class: "prediction-value" }, [
            `${solution.target}: `,
            el(doc, "strong", {}, [String(prediction.prediction)]),
          ]),
          ...bars.map((bar) =>
            el(doc, "div", { class: "prob-bar-row" }, [
              el(doc, "span", { class: "prob-label" }, [bar.label]),
              el(doc, "div", { class: "prob-bar" }, [
                el(doc, "div", {
                  class: "prob-fill",
                  style: `width: ${bar.pct.toFixed(1)}%`,
                }),
              ]),
              el(doc, "span", { class: "prob-pct" }, [percent(bar.pct / 100)]),
            ]),
          ),
        );
      } catch (err) {
        showError(errors, err);
        if (err instanceof ApiError) {
          // map a named missing/invalid column back onto its field
          for (const fieldRow of fieldRows) {
            const name = fieldRow.getAttribute("data-field")!;
            if (err.message.includes(name)) {
              fieldRow.querySelector(".field-error")!.textContent = err.message;
            }
          }
        }
      }
    },
    lastBars: () => bars,
  };
  predictBtn.addEventListener("click", (ev) => {
    ev.preventDefault();
    void view.submit();
  });
  return view;
}

function makeControl(
  doc: Document,
  field: FieldSpec,
  onChange: (value: unknown) => void,
): { element: HTMLElement; initial: unknown } {
  if (field.kind === "number") {
    const input = el(doc, "input", { type: "number", step: "any" });
    input.addEventListener("input", () => onChange(input.value));
    return { element: input, initial: "" };
  }
  if (field.kind === "category") {
    const select = el(doc, "select");
    for (const option of field.options) {
      select.append(el(doc, "option", { value: option }, [option]));
    }
    select.addEventListener("change", () => onChange(select.value));
    return { element: select, initial: field.options[0] ?? "" };
  }
  if (field.kind === "binary") {
    const input = el(doc, "input", { type: "checkbox", class: "toggle" });
    input.addEventListener("change", () => onChange(input.checked));
    return { element: input, initial: false };
  }
  const area = el(doc, "textarea", { rows: "2" });
  area.addEventListener("input", () => onChange(area.value));
  return { element: area, initial: "" };
}

// --- databag list (landing page) ----------------------------------------------------------

export function databagList(ctx: Ctx, bags: Databag[]): HTMLElement {
  const { doc } = ctx;
  const list = el(doc, "ul", { class: "databag-list" });
  for (const bag of bags) {
    const link = el(doc, "a", { href: `#/databags/${bag.id}` }, [bag.name]);
    list.append(
      el(doc, "li", {}, [
        link,
        el(doc, "span", { class: "muted" }, [` ${bag.row_count} rows, ${bag.columns.length} columns`]),
      ]),
    );
  }
  if (bags.length === 0) {
    list.append(el(doc, "li", { class: "muted" }, ["No datasets yet — upload one above."]));
  }
  return el(doc, "section", { class: "card" }, [el(doc, "h2", {}, ["Datasets"]), list]);
}

export function solutionList(ctx: Ctx, solutions: Solution[]): HTMLElement {
  const { doc } = ctx;
  const list = el(doc, "ul", { class: "solution-list" });
  for (const solution of solutions) {
    list.append(
      el(doc, "li", {}, [
        el(doc, "a", { href: `#/solutions/${solution.id}` }, [solution.name]),
        el(doc, "span", { class: `badge ${statusClass(solution.status)}` }, [solution.status]),
      ]),
    );
  }
  if (solutions.length === 0) {
    list.append(el(doc, "li", { class: "muted" }, ["No models yet."]));
  }
  return el(doc, "section", { class: "card" }, [el(doc, "h2", {}, ["Models"]), list]);
}
