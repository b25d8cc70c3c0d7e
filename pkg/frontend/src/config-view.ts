// Config editor: renders the engine config as a form, validates inline,
// and PUTs on explicit save only. Server-side violations are rendered
// against the offending fields by their document paths.

import { getConfig, putConfig } from "./api.js";
import type { ConfigDoc, RouteIn, RouteOut } from "./types.js";
import { validateConfig, type Violation } from "./validate.js";

const IN_FIELDS: (keyof RouteIn)[] = ["device", "kind", "channel", "number", "dim"];
const OUT_FIELDS: (keyof RouteOut)[] = [
  "device", "kind", "channel", "number", "dim", "out_lo", "out_hi", "velocity",
];

export class ConfigView {
  private root: HTMLElement;
  private doc: ConfigDoc | null = null;
  private banner: HTMLElement;
  private violationsBox: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.banner = document.createElement("div");
    this.banner.className = "banner hidden";
    this.violationsBox = document.createElement("ul");
    this.violationsBox.className = "violations";
  }

  async load(): Promise<void> {
    this.root.textContent = "";
    this.root.appendChild(this.banner);
    try {
      this.doc = await getConfig();
    } catch (err) {
      this.showBanner(`cannot reach the engine: ${err}`, true);
      return;
    }
    this.render();
  }

  private showBanner(text: string, isError: boolean): void {
    this.banner.textContent = text;
    this.banner.className = `banner ${isError ? "error" : "okay"}`;
    if (text === "") this.banner.className = "banner hidden";
  }

  private render(): void {
    const doc = this.doc!;
    this.root.querySelector("form")?.remove();
    const form = document.createElement("form");
    form.onsubmit = (e) => {
      e.preventDefault();
      void this.save();
    };

    form.appendChild(this.numberField("dimension", doc.dimension, 1, 1024, 1, (v) => {
      doc.dimension = v;
    }));
    form.appendChild(this.textField("model_file", doc.model_file, (v) => {
      doc.model_file = v;
    }));

    const interaction = this.fieldset("interaction");
    interaction.appendChild(this.selectField(
      "interaction.mode", doc.interaction.mode,
      ["call_and_response", "ai_only", "human_only"],
      (v) => { doc.interaction.mode = v as ConfigDoc["interaction"]["mode"]; },
    ));
    interaction.appendChild(this.sliderField(
      "interaction.switchover_s", doc.interaction.switchover_s, 0.1, 10, 0.1,
      (v) => { doc.interaction.switchover_s = v; },
    ));
    interaction.appendChild(this.numberField(
      "interaction.tick_hz", doc.interaction.tick_hz, 1, 1000, 1,
      (v) => { doc.interaction.tick_hz = v; },
    ));
    form.appendChild(interaction);

    const sampling = this.fieldset("sampling");
    sampling.appendChild(this.sliderField(
      "sampling.pi_temp", doc.sampling.pi_temp, 0.05, 4, 0.05,
      (v) => { doc.sampling.pi_temp = v; },
    ));
    sampling.appendChild(this.sliderField(
      "sampling.sigma_temp", doc.sampling.sigma_temp, 0, 4, 0.05,
      (v) => { doc.sampling.sigma_temp = v; },
    ));
    form.appendChild(sampling);

    form.appendChild(this.routesTable("inputs", doc.inputs, IN_FIELDS, () => ({
      device: "", kind: "control_change" as const, channel: 0, number: 1, dim: 0,
    })));
    form.appendChild(this.routesTable("outputs", doc.outputs, OUT_FIELDS, () => ({
      device: "", kind: "control_change" as const, channel: 0, number: 1, dim: 0,
      out_lo: 0, out_hi: 127, velocity: 100,
    })));

    const misc = this.fieldset("engine");
    misc.appendChild(this.numberField("dt_max", doc.dt_max, 0.1, 60, 0.1, (v) => {
      doc.dt_max = v;
    }));
    misc.appendChild(this.numberField("gate_s", doc.gate_s, 0.01, 5, 0.01, (v) => {
      doc.gate_s = v;
    }));
    misc.appendChild(this.textField("log_dir", doc.log_dir, (v) => {
      doc.log_dir = v;
    }));
    form.appendChild(misc);

    const save = document.createElement("button");
    save.type = "submit";
    save.textContent = "Save and apply";
    form.appendChild(save);
    form.appendChild(this.violationsBox);
    this.root.appendChild(form);
  }

  private async save(): Promise<void> {
    const doc = this.doc!;
    const local = validateConfig(doc);
    this.renderViolations(local.map((v) => `${v.path}: ${v.message}`), local);
    if (local.length > 0) return;
    const result = await putConfig(doc);
    if (result.ok) {
      this.showBanner("applied", false);
      this.renderViolations([], []);
      await this.load();
    } else {
      this.showBanner(`rejected (HTTP ${result.status})`, true);
      this.renderViolations(result.violations, parsePaths(result.violations));
    }
  }

  private renderViolations(messages: string[], pathed: Violation[]): void {
    this.violationsBox.textContent = "";
    for (const message of messages) {
      const item = document.createElement("li");
      item.textContent = message;
      this.violationsBox.appendChild(item);
    }
    this.root.querySelectorAll(".invalid").forEach((el) => el.classList.remove("invalid"));
    for (const violation of pathed) {
      this.root
        .querySelector(`[data-path="${violation.path}"]`)
        ?.classList.add("invalid");
    }
  }

  // --- widgets -------------------------------------------------------------

  private fieldset(legend: string): HTMLFieldSetElement {
    const set = document.createElement("fieldset");
    const label = document.createElement("legend");
    label.textContent = legend;
    set.appendChild(label);
    return set;
  }

  private labeled(path: string, input: HTMLElement): HTMLElement {
    const wrap = document.createElement("label");
    wrap.className = "field";
    wrap.dataset.path = path;
    const name = document.createElement("span");
    name.textContent = path.split(".").pop()!;
    wrap.append(name, input);
    return wrap;
  }

  private textField(path: string, value: string, set: (v: string) => void): HTMLElement {
    const input = document.createElement("input");
    input.type = "text";
    input.value = value;
    input.oninput = () => set(input.value);
    return this.labeled(path, input);
  }

  private numberField(
    path: string, value: number, min: number, max: number, step: number,
    set: (v: number) => void,
  ): HTMLElement {
    const input = document.createElement("input");
    input.type = "number";
    input.min = String(min);
    input.max = String(max);
    input.step = String(step);
    input.value = String(value);
    input.oninput = () => set(Number(input.value));
    return this.labeled(path, input);
  }

  private sliderField(
    path: string, value: number, min: number, max: number, step: number,
    set: (v: number) => void,
  ): HTMLElement {
    const wrap = document.createElement("span");
    wrap.className = "slider-pair";
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(min);
    slider.max = String(max);
    slider.step = String(step);
    slider.value = String(value);
    const box = document.createElement("input");
    box.type = "number";
    box.min = String(min);
    box.max = String(max);
    box.step = String(step);
    box.value = String(value);
    slider.oninput = () => {
      box.value = slider.value;
      set(Number(slider.value));
    };
    box.oninput = () => {
      slider.value = box.value;
      set(Number(box.value));
    };
    wrap.append(slider, box);
    return this.labeled(path, wrap);
  }

  private selectField(
    path: string, value: string, options: string[], set: (v: string) => void,
  ): HTMLElement {
    const select = document.createElement("select");
    for (const option of options) {
      const el = document.createElement("option");
      el.value = option;
      el.textContent = option;
      el.selected = option === value;
      select.appendChild(el);
    }
    select.onchange = () => set(select.value);
    return this.labeled(path, select);
  }

  private routesTable<R extends RouteIn>(
    name: "inputs" | "outputs",
    routes: R[],
    fields: (keyof R)[],
    blank: () => R,
  ): HTMLElement {
    const set = this.fieldset(name);
    const table = document.createElement("table");
    const head = table.insertRow();
    for (const field of fields) {
      const cell = document.createElement("th");
      cell.textContent = String(field);
      head.appendChild(cell);
    }
    head.appendChild(document.createElement("th"));
    routes.forEach((route, index) => {
      const row = table.insertRow();
      for (const field of fields) {
        const cell = row.insertCell();
        cell.dataset.path = `${name}[${index}].${String(field)}`;
        if (field === "kind") {
          const select = document.createElement("select");
          for (const kind of ["note_on", "control_change"]) {
            const el = document.createElement("option");
            el.value = kind;
            el.textContent = kind;
            el.selected = route.kind === kind;
            select.appendChild(el);
          }
          select.onchange = () => {
            (route as RouteIn).kind = select.value as RouteIn["kind"];
          };
          cell.appendChild(select);
        } else if (field === "device") {
          const input = document.createElement("input");
          input.type = "text";
          input.value = String(route[field]);
          input.oninput = () => {
            (route[field] as unknown) = input.value;
          };
          cell.appendChild(input);
        } else {
          const input = document.createElement("input");
          input.type = "number";
          input.value = String(route[field]);
          input.oninput = () => {
            (route[field] as unknown) = Number(input.value);
          };
          cell.appendChild(input);
        }
      }
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "remove";
      remove.onclick = () => {
        routes.splice(index, 1);
        this.render();
      };
      row.insertCell().appendChild(remove);
    });
    const add = document.createElement("button");
    add.type = "button";
    add.textContent = `add ${name.slice(0, -1)}`;
    add.onclick = () => {
      routes.push(blank());
      this.render();
    };
    set.append(table, add);
    return set;
  }
}

function parsePaths(violations: string[]): Violation[] {
  // server violations look like "outputs[2].out_lo: message"
  const out: Violation[] = [];
  for (const violation of violations) {
    const idx = violation.indexOf(": ");
    if (idx > 0) {
      out.push({ path: violation.slice(0, idx), message: violation.slice(idx + 2) });
    }
  }
  return out;
}
