/**
 * Case intake form: patient identifier, a folder picker backed by the
 * server's browse roots, and a processing-mode selector.
 *
 * The patient identifier is posted once and never stored client-side; the
 * dashboard only ever sees the pseudonym the server hands back.
 */

import { ApiError, type ServiceApi, type FsEntry } from "./api.js";

export interface IntakeOptions {
  /** A submission left the form; show a placeholder row. */
  onPending: (tempId: string, label: string) => void;
  /** The server accepted it; swap the placeholder for the real job. */
  onConfirmed: (tempId: string, jobId: string) => void;
  /** The server rejected it; drop the placeholder. */
  onFailed: (tempId: string) => void;
}

let nextTemp = 0;

export class IntakeForm {
  private readonly patient: HTMLInputElement;
  private readonly folder: HTMLSelectElement;
  private readonly mode: HTMLSelectElement;
  private readonly submit: HTMLButtonElement;
  private readonly error: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ServiceApi,
    private readonly opts: IntakeOptions,
  ) {
    this.patient = document.createElement("input");
    this.patient.type = "text";
    this.patient.name = "patient";
    this.patient.placeholder = "patient identifier";
    this.patient.autocomplete = "off";

    this.folder = document.createElement("select");
    this.folder.name = "folder";

    this.mode = document.createElement("select");
    this.mode.name = "mode";
    for (const m of ["fast", "advanced"]) {
      const opt = document.createElement("option");
      opt.value = m;
      opt.textContent = m;
      this.mode.appendChild(opt);
    }

    this.submit = document.createElement("button");
    this.submit.textContent = "queue case";
    this.submit.disabled = true;

    this.error = document.createElement("p");
    this.error.className = "intake-error";
    this.error.hidden = true;

    this.patient.addEventListener("input", () => this.syncDisabled());
    this.submit.addEventListener("click", (e) => {
      e.preventDefault();
      void this.doSubmit();
    });

    const form = document.createElement("form");
    form.append(this.patient, this.folder, this.mode, this.submit, this.error);
    this.root.replaceChildren(form);
  }

  /**
   * Populate the folder picker with case folders under the browse roots.
   *
   * Any directory holding video segments directly is offered; directories
   * without segments are walked for nested case folders.
   */
  async loadFolders(): Promise<void> {
    const cases: FsEntry[] = [];
    const roots = await this.api.listFs();
    const queue = roots.entries.filter((e) => e.kind === "dir");
    let visited = 0;
    while (queue.length > 0 && visited < 500) {
      const entry = queue.shift()!;
      visited += 1;
      if ((entry.segments ?? 0) > 0) {
        cases.push(entry);
      }
      const listing = await this.api.listFs(entry.path);
      queue.push(...listing.entries.filter((e) => e.kind === "dir"));
    }
    this.folder.replaceChildren();
    for (const c of cases) {
      const opt = document.createElement("option");
      opt.value = c.path;
      opt.textContent = `${c.name} (${c.segments} segments)`;
      this.folder.appendChild(opt);
    }
    this.syncDisabled();
  }

  private syncDisabled(): void {
    const empty = this.patient.value.trim() === "";
    this.submit.disabled = empty || this.folder.value === "";
  }

  private async doSubmit(): Promise<void> {
    this.error.hidden = true;
    const tempId = `pending-${nextTemp++}`;
    this.opts.onPending(tempId, "(submitting)");
    try {
      const res = await this.api.submitCase({
        patient_id: this.patient.value.trim(),
        folder: this.folder.value,
        mode: this.mode.value,
      });
      this.patient.value = "";
      this.syncDisabled();
      this.opts.onConfirmed(tempId, res.job_id);
    } catch (err) {
      this.opts.onFailed(tempId);
      this.error.textContent =
        err instanceof ApiError ? err.message : "submission failed";
      this.error.hidden = false;
    }
  }
}
