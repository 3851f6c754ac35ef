// DOM widgets: phase/connection badges, exercise picker, Place/Move, the
// CI slider, Start/Stop, feedback-mode toggle, numeric error readout
// (duplicating the color channel for colorblind users) and error toasts.

import { CiName } from "./protocol.js";
import { SessionStore } from "./session.js";

export interface UiCallbacks {
  onSelect(exercise: string): void;
  onPlaceMove(): void;
  onCi(ci: CiName): void;
  onMode(mode: string): void;
  onStart(): void;
  onStop(): void;
  onReset(): void;
}

const CI_ORDER: CiName[] = ["C1", "C2", "C3"];

export class Ui {
  readonly root: HTMLElement;
  private phaseBadge!: HTMLElement;
  private connBadge!: HTMLElement;
  private errorReadout!: HTMLElement;
  private summaryLine!: HTMLElement;
  private toastBox!: HTMLElement;
  private ciSlider!: HTMLInputElement;
  placing = false;

  constructor(private cb: UiCallbacks) {
    this.root = document.createElement("div");
    this.root.id = "sidebar";
    this.build();
  }

  private button(label: string, onClick: () => void, cls = ""): HTMLButtonElement {
    const b = document.createElement("button");
    b.textContent = label;
    b.className = cls;
    b.addEventListener("click", onClick);
    return b;
  }

  private build(): void {
    const h = document.createElement("h1");
    h.textContent = "tunnel trainer";
    this.root.appendChild(h);

    this.connBadge = document.createElement("div");
    this.connBadge.className = "badge";
    this.phaseBadge = document.createElement("div");
    this.phaseBadge.className = "badge";
    this.root.append(this.connBadge, this.phaseBadge);

    const pick = document.createElement("div");
    pick.className = "row";
    for (const ex of ["T1", "T2", "T3", "T4"]) {
      pick.appendChild(this.button(ex, () => this.cb.onSelect(ex)));
    }
    this.root.appendChild(pick);

    const place = this.button("Place / Move", () => {
      this.placing = !this.placing;
      place.classList.toggle("active", this.placing);
      this.cb.onPlaceMove();
    }, "place");
    this.root.appendChild(place);

    const sliderLabel = document.createElement("label");
    sliderLabel.textContent = "confidence interval";
    this.ciSlider = document.createElement("input");
    this.ciSlider.type = "range";
    this.ciSlider.min = "0";
    this.ciSlider.max = "2";
    this.ciSlider.value = "0";
    this.ciSlider.addEventListener("input", () => {
      this.cb.onCi(CI_ORDER[Number(this.ciSlider.value)]);
    });
    sliderLabel.appendChild(this.ciSlider);
    this.root.appendChild(sliderLabel);

    const modeLabel = document.createElement("label");
    modeLabel.textContent = "feedback mode";
    const mode = document.createElement("select");
    for (const m of ["overwrite", "reset_per_rep"]) {
      const o = document.createElement("option");
      o.value = m;
      o.textContent = m;
      mode.appendChild(o);
    }
    mode.addEventListener("change", () => this.cb.onMode(mode.value));
    modeLabel.appendChild(mode);
    this.root.appendChild(modeLabel);

    const runRow = document.createElement("div");
    runRow.className = "row";
    runRow.append(
      this.button("Start", () => this.cb.onStart(), "start"),
      this.button("Stop", () => this.cb.onStop(), "stop"),
      this.button("Reset tunnel", () => this.cb.onReset()),
    );
    this.root.appendChild(runRow);

    this.errorReadout = document.createElement("div");
    this.errorReadout.className = "readout";
    this.summaryLine = document.createElement("div");
    this.summaryLine.className = "readout";
    this.toastBox = document.createElement("div");
    this.toastBox.className = "toasts";
    this.root.append(this.errorReadout, this.summaryLine, this.toastBox);

    const help = document.createElement("p");
    help.className = "help";
    help.textContent =
      "drag: move the hand in the plane - wheel: height above the plane - " +
      "shift+drag: orbit the camera";
    this.root.appendChild(help);
  }

  render(store: SessionStore): void {
    this.connBadge.textContent = store.connected ? "connected" : "reconnecting...";
    this.connBadge.classList.toggle("bad", !store.connected);
    this.phaseBadge.textContent = `phase: ${store.phase}`;
    this.ciSlider.disabled = store.phase === "executing";
    if (store.currentError !== null) {
      this.errorReadout.textContent =
        `error ${(store.currentError * 100).toFixed(1)} cm ` +
        `(sphere #${store.nearestIndex}) - ` +
        `${store.greenCount()}/${store.spheres.length} green`;
    } else {
      this.errorReadout.textContent = "";
    }
    if (store.phase === "stopped" && store.taskError !== null) {
      this.summaryLine.textContent =
        `task error ${(store.taskError * 100).toFixed(2)} cm over ` +
        `${store.repetitionCount} repetition(s)`;
    } else {
      this.summaryLine.textContent = "";
    }
    this.toastBox.replaceChildren(
      ...store.toasts.slice(-3).map((t) => {
        const d = document.createElement("div");
        d.className = "toast";
        d.textContent = `${t.code}: ${t.message}`;
        return d;
      }),
    );
  }
}
