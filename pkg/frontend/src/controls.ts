/** Filter controls: class and outcome selection plus threshold sliders. */

import type { FilterSpecDoc } from "./types";

export interface ControlCallbacks {
  onSpecChange(spec: FilterSpecDoc): void;
  onClear(): void;
}

export function renderControls(
  container: HTMLElement,
  allClasses: string[],
  spec: FilterSpecDoc,
  maxClusterSize: number,
  maxMeanValue: number,
  callbacks: ControlCallbacks
): void {
  container.textContent = "";
  container.classList.add("controls");

  const classBox = document.createElement("fieldset");
  const classTitle = document.createElement("legend");
  classTitle.textContent = "classes";
  classBox.appendChild(classTitle);
  for (const cls of allClasses) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.value = cls;
    input.dataset.class = cls;
    input.checked = spec.classes === null || spec.classes.includes(cls);
    input.addEventListener("change", () => {
      const checked = [
        ...container.querySelectorAll<HTMLInputElement>("input[data-class]"),
      ]
        .filter((el) => el.checked)
        .map((el) => el.value);
      callbacks.onSpecChange({
        ...spec,
        classes: checked.length === allClasses.length ? null : checked,
      });
    });
    label.appendChild(input);
    label.appendChild(document.createTextNode(cls));
    classBox.appendChild(label);
  }
  container.appendChild(classBox);

  const outcomeBox = document.createElement("fieldset");
  const outcomeTitle = document.createElement("legend");
  outcomeTitle.textContent = "prediction outcome";
  outcomeBox.appendChild(outcomeTitle);
  const select = document.createElement("select");
  select.dataset.control = "outcome";
  for (const value of ["any", "correct", "incorrect"] as const) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    option.selected = spec.outcome === value;
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    callbacks.onSpecChange({
      ...spec,
      outcome: select.value as FilterSpecDoc["outcome"],
    });
  });
  outcomeBox.appendChild(select);
  container.appendChild(outcomeBox);

  const sliders = document.createElement("fieldset");
  const slidersTitle = document.createElement("legend");
  slidersTitle.textContent = "thresholds";
  sliders.appendChild(slidersTitle);
  sliders.appendChild(
    slider(
      "min cluster size",
      "min_cluster_size",
      spec.min_cluster_size,
      maxClusterSize,
      1,
      (v) => callbacks.onSpecChange({ ...spec, min_cluster_size: v })
    )
  );
  sliders.appendChild(
    slider(
      "min block mean value",
      "min_mean_value",
      spec.min_mean_value,
      maxMeanValue,
      maxMeanValue / 100 || 0.001,
      (v) => callbacks.onSpecChange({ ...spec, min_mean_value: v })
    )
  );
  container.appendChild(sliders);

  const clear = document.createElement("button");
  clear.dataset.control = "clear";
  clear.textContent = "clear filters";
  clear.addEventListener("click", () => callbacks.onClear());
  container.appendChild(clear);
}

function slider(
  label: string,
  name: string,
  value: number,
  max: number,
  step: number,
  onChange: (value: number) => void
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "slider";
  wrap.appendChild(document.createTextNode(label));
  const input = document.createElement("input");
  input.type = "range";
  input.min = "0";
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  input.dataset.control = name;
  input.addEventListener("change", () => onChange(Number(input.value)));
  wrap.appendChild(input);
  return wrap;
}
