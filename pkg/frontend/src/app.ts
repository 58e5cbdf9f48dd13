/**
 * Screen controller: dataset picker, known-attributes form, live dashboard,
 * identification screen. Holds exactly one active session, echoes the
 * optimistic revision token on every mutation, and turns API conflicts into
 * banners instead of losing state.
 */

import { ApiClient, ApiError } from "./api.js";
import type { DatasetRecord, RecommendationsPayload, SessionPayload } from "./api.js";
import { renderDashboard, renderIdentified, renderKnownsForm, renderPicker } from "./render.js";
import type { Banner } from "./render.js";
import { buildViewModel } from "./viewmodel.js";
import type { SessionViewModel } from "./viewmodel.js";

export type Screen = "picker" | "knowns" | "dashboard" | "identified";

const RECOMMENDATION_TOP = 5;

export class App {
  api: ApiClient;
  onRender: (html: string) => void;

  screen: Screen = "picker";
  datasets: DatasetRecord[] = [];
  dataset: DatasetRecord | null = null;
  knownDraft: Record<string, string> = {};
  session: SessionPayload | null = null;
  recommendations: RecommendationsPayload | null = null;
  vm: SessionViewModel | null = null;
  banner: Banner | null = null;
  whatIfOpen: string | null = null;
  html = "";

  constructor(api: ApiClient, onRender?: (html: string) => void) {
    this.api = api;
    this.onRender = onRender ?? (() => {});
  }

  // ── rendering ─────────────────────────────────────────────────────────────

  render(): void {
    if (this.screen === "picker") {
      this.html = renderPicker(this.datasets, this.banner);
    } else if (this.screen === "knowns" && this.dataset) {
      this.html = renderKnownsForm(this.dataset, this.knownDraft, this.banner);
    } else if (this.screen === "dashboard" && this.vm && this.dataset) {
      this.html = renderDashboard(this.vm, this.dataset, this.banner, this.whatIfOpen);
    } else if (this.screen === "identified" && this.vm && this.dataset) {
      this.html = renderIdentified(this.vm, this.dataset, this.banner);
    } else {
      this.html = `<section class="screen"><p>loading...</p></section>`;
    }
    this.onRender(this.html);
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.banner = { kind: "error", text: `${err.code}: ${err.message}` };
      this.render();
      return;
    }
    throw err;
  }

  // ── session state plumbing ────────────────────────────────────────────────

  private async loadRecommendations(): Promise<void> {
    if (this.session && this.session.status === "active") {
      this.recommendations = await this.api.getRecommendations(
        this.session.session_id,
        RECOMMENDATION_TOP,
      );
    } else {
      this.recommendations = null;
    }
  }

  private rebuild(): void {
    if (!this.session) {
      this.vm = null;
      return;
    }
    this.vm = buildViewModel(this.session, this.recommendations);
    this.screen = this.session.status === "identified" ? "identified" : "dashboard";
  }

  private async adopt(session: SessionPayload): Promise<void> {
    this.session = session;
    await this.loadRecommendations();
    this.rebuild();
  }

  // ── user actions ──────────────────────────────────────────────────────────

  async start(): Promise<void> {
    try {
      this.datasets = await this.api.listDatasets();
      this.screen = "picker";
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  async uploadDataset(name: string, csv: string): Promise<void> {
    try {
      const record = await this.api.uploadDataset(csv, name);
      this.datasets = await this.api.listDatasets();
      this.banner = { kind: "info", text: `Dataset ${record.dataset_id} ready.` };
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  async chooseDataset(datasetId: string): Promise<void> {
    try {
      this.dataset = await this.api.getDataset(datasetId);
      this.knownDraft = {};
      this.banner = null;
      this.screen = "knowns";
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  setKnown(attribute: string, value: string): void {
    if (value === "") {
      delete this.knownDraft[attribute];
    } else {
      this.knownDraft[attribute] = value;
    }
    this.render();
  }

  async openSession(): Promise<void> {
    if (!this.dataset) return;
    try {
      this.banner = null;
      this.whatIfOpen = null;
      await this.adopt(
        await this.api.createSession(this.dataset.dataset_id, { ...this.knownDraft }),
      );
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  toggleWhatIf(attribute: string): void {
    this.whatIfOpen = this.whatIfOpen === attribute ? null : attribute;
    this.render();
  }

  async enterValue(attribute: string, value: string): Promise<void> {
    if (!this.session) return;
    try {
      this.banner = null;
      this.whatIfOpen = null;
      await this.adopt(
        await this.api.addObservation(
          this.session.session_id,
          attribute,
          value,
          this.session.revision,
        ),
      );
      this.render();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else advanced or closed the session; refresh, lose nothing
        this.banner = {
          kind: "conflict",
          text: `Not recorded: ${err.message}. The view has been refreshed.`,
        };
        await this.refresh(true);
        return;
      }
      this.fail(err);
    }
  }

  async refresh(keepBanner = false): Promise<void> {
    if (!this.session) return;
    try {
      if (!keepBanner) this.banner = null;
      await this.adopt(await this.api.getSession(this.session.session_id));
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Delete the session and replay the first ``keep`` path steps onto a
   * fresh one seeded with the same knowns. */
  async rollbackTo(keep: number): Promise<void> {
    if (!this.session || !this.dataset) return;
    const known = { ...this.session.known };
    const prefix = this.session.path.slice(0, keep);
    try {
      await this.api.deleteSession(this.session.session_id);
      let session = await this.api.createSession(this.dataset.dataset_id, known);
      for (const step of prefix) {
        session = await this.api.addObservation(
          session.session_id,
          step.attribute,
          step.value,
          session.revision,
        );
      }
      this.banner = {
        kind: "info",
        text: `Rolled back: kept ${prefix.length} of the recorded observations.`,
      };
      this.whatIfOpen = null;
      await this.adopt(session);
      this.render();
    } catch (err) {
      this.fail(err);
    }
  }

  async endSession(): Promise<void> {
    if (!this.session) return;
    try {
      await this.api.deleteSession(this.session.session_id);
      this.session = null;
      this.recommendations = null;
      this.vm = null;
      this.banner = null;
      await this.start();
    } catch (err) {
      this.fail(err);
    }
  }

  newSession(): void {
    this.session = null;
    this.recommendations = null;
    this.vm = null;
    this.banner = null;
    this.whatIfOpen = null;
    this.screen = "knowns";
    this.render();
  }

  backToPicker(): void {
    this.session = null;
    this.recommendations = null;
    this.vm = null;
    this.dataset = null;
    this.banner = null;
    this.whatIfOpen = null;
    this.screen = "picker";
    void this.start();
  }
}
