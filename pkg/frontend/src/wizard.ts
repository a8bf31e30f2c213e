/** Guided model selection: an ordered question walk that lands on one of
 * the supported families, with unsupported branches shown greyed out
 * rather than hidden.  Back-navigation preserves earlier answers. */

import type { Family } from "./types.js";

export interface WizardQuestion {
  id: QuestionId;
  prompt: string;
  explanation: string;
}

export type QuestionId =
  | "interval_censored"
  | "competing_risks"
  | "has_strata"
  | "wants_flexibility"
  | "out_of_sample";

export const QUESTIONS: WizardQuestion[] = [
  {
    id: "interval_censored",
    prompt: "Are event times only known to lie inside an interval?",
    explanation:
      "Interval-censored fits are not supported in this build; answering " +
      "yes shows the unsupported branch.",
  },
  {
    id: "competing_risks",
    prompt: "Can a competing event preclude the event of interest?",
    explanation: "Competing risks call for a cumulative-incidence model.",
  },
  {
    id: "has_strata",
    prompt: "Should groups keep their own baseline hazard?",
    explanation: "Strata share coefficients but not baselines.",
  },
  {
    id: "wants_flexibility",
    prompt: "Is flexible non-linear modeling worth giving up inference?",
    explanation:
      "Machine-learning fits predict well but give no coefficient tests; " +
      "deep neural families are not supported in this build.",
  },
  {
    id: "out_of_sample",
    prompt: "Is out-of-sample prediction the priority?",
    explanation: "Parametric fits extrapolate beyond the observed follow-up.",
  },
];

export const UNSUPPORTED_BRANCHES: { id: string; label: string; reason: string }[] = [
  {
    id: "interval_censored_ph",
    label: "interval-censored proportional hazards",
    reason: "unsupported in this build",
  },
  {
    id: "interval_censored_subdist",
    label: "interval-censored subdistribution model",
    reason: "unsupported in this build",
  },
  {
    id: "deep_learning",
    label: "deep neural survival models",
    reason: "unsupported in this build",
  },
];

export type Answers = Partial<Record<QuestionId, boolean>>;

export interface WizardOutcome {
  family: Family | null;
  unsupported: boolean;
  note: string;
}

/** Deterministic mapping from answers to the preselected family.  An
 * interval-censoring answer parks the wizard on the unsupported branch
 * until the answer changes. */
export function resolveFamily(answers: Answers): WizardOutcome {
  if (answers.interval_censored) {
    return {
      family: null,
      unsupported: true,
      note: "interval-censored models: unsupported in this build",
    };
  }
  if (answers.competing_risks) {
    return { family: "fine_gray", unsupported: false, note: "cumulative incidence" };
  }
  if (answers.has_strata) {
    return {
      family: "stratified_cox",
      unsupported: false,
      note: "per-stratum baselines",
    };
  }
  if (answers.wants_flexibility) {
    return { family: "rsf", unsupported: false, note: "flexible, no inference" };
  }
  if (answers.out_of_sample) {
    return { family: "parametric", unsupported: false, note: "extrapolates" };
  }
  return { family: "cox", unsupported: false, note: "semi-parametric default" };
}

export class Wizard {
  private answers: Answers = {};
  private position = 0;

  get current(): WizardQuestion {
    return QUESTIONS[this.position];
  }

  get done(): boolean {
    return this.position >= QUESTIONS.length;
  }

  answerOf(id: QuestionId): boolean | undefined {
    return this.answers[id];
  }

  /** Record the answer for the current question and advance.  Branches
   * that fully determine the family skip the remaining questions. */
  answer(value: boolean): void {
    if (this.done) throw new Error("wizard already finished");
    const id = this.current.id;
    this.answers[id] = value;
    if (value && (id === "interval_censored" || id === "competing_risks" ||
                  id === "has_strata" || id === "wants_flexibility")) {
      this.position = QUESTIONS.length;
      return;
    }
    this.position += 1;
  }

  /** Step back one question; the stored answer is kept so the walk can
   * be replayed (back-navigation preserves answers). */
  back(): void {
    if (this.position === 0) return;
    if (this.done) {
      // find the last answered question
      for (let i = QUESTIONS.length - 1; i >= 0; i--) {
        if (this.answers[QUESTIONS[i].id] !== undefined) {
          this.position = i;
          return;
        }
      }
      this.position = 0;
      return;
    }
    this.position -= 1;
  }

  outcome(): WizardOutcome {
    return resolveFamily(this.answers);
  }

  reset(): void {
    this.answers = {};
    this.position = 0;
  }
}
