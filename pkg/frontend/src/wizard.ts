/**
 * Questionnaire wizard state.
 *
 * The server is the single source of truth for the current question: the
 * wizard can only answer the index it last received, so no interaction
 * (back button, refresh, duplicate tab) can ever skip or repeat an item.
 * One answer produces exactly one POST; a rejected out-of-order POST
 * triggers a resync to the server-reported question before anything else.
 */

import { ApiClient, ApiFailure, Question } from './api.js';

export type WizardPhase =
    | 'landing'
    | 'question'
    | 'submitting'
    | 'finished'
    | 'gate-closed'
    | 'failed';

export interface WizardState {
    phase: WizardPhase;
    token: string | null;
    teacherName: string | null;
    total: number;
    question: Question | null;
    selected: number | null;
    resultId: number | null;
    answersUrl: string | null;
    gateCode: string | null;
    errorMessage: string | null;
    postCount: number;
}

export function initialWizard(): WizardState {
    return {
        phase: 'landing',
        token: null,
        teacherName: null,
        total: 0,
        question: null,
        selected: null,
        resultId: null,
        answersUrl: null,
        gateCode: null,
        errorMessage: null,
        postCount: 0,
    };
}

export interface AnswerPost {
    index: number;
    value: number;
}

/** The only place an answer payload may be built: always the server-reported index. */
export function buildAnswerPost(state: WizardState): AnswerPost | null {
    if (state.phase !== 'question' || state.question === null || state.selected === null) {
        return null;
    }
    return { index: state.question.index, value: state.selected };
}

export class WizardController {
    state: WizardState = initialWizard();

    constructor(
        private api: ApiClient,
        private onChange: (state: WizardState) => void = () => {},
    ) {}

    private update(patch: Partial<WizardState>): void {
        this.state = { ...this.state, ...patch };
        this.onChange(this.state);
    }

    /** Entry action from the landing page; gate errors become full-page notices. */
    async begin(): Promise<void> {
        try {
            const start = await this.api.startSession();
            this.update({
                phase: 'question',
                token: start.token,
                teacherName: start.teacher.name,
                total: start.total,
                question: start.question,
                selected: null,
            });
        } catch (err) {
            if (err instanceof ApiFailure &&
                (err.code === 'evaluation_inactive' ||
                    err.code === 'ip_not_allowed' ||
                    err.code === 'session_active_for_ip')) {
                this.update({ phase: 'gate-closed', gateCode: err.code });
                return;
            }
            this.update({ phase: 'failed', errorMessage: String(err) });
        }
    }

    select(value: number): void {
        if (this.state.phase !== 'question') return;
        this.update({ selected: value });
    }

    /** Ask the server which question is current and show exactly that. */
    async resync(): Promise<void> {
        if (this.state.token === null) return;
        try {
            const question = await this.api.currentQuestion(this.state.token);
            this.update({ phase: 'question', question, selected: null });
        } catch (err) {
            if (err instanceof ApiFailure && err.code === 'session_not_active') {
                await this.routeToAnswersIfCompleted();
                return;
            }
            this.update({ phase: 'failed', errorMessage: String(err) });
        }
    }

    private async routeToAnswersIfCompleted(): Promise<void> {
        if (this.state.token === null) return;
        try {
            const view = await this.api.ownAnswers(this.state.token);
            this.update({
                phase: 'finished',
                resultId: view.result_id,
                answersUrl: `/api/results/own/${this.state.token}`,
            });
        } catch (err) {
            this.update({ phase: 'failed', errorMessage: String(err) });
        }
    }

    /** Submit the selected answer: exactly one POST, then advance or resync. */
    async continueToNext(): Promise<void> {
        const post = buildAnswerPost(this.state);
        if (post === null || this.state.token === null) return;
        this.update({ phase: 'submitting', postCount: this.state.postCount + 1 });
        try {
            const reply = await this.api.submitAnswer(this.state.token, post.index, post.value);
            if (reply.finished) {
                this.update({
                    phase: 'finished',
                    resultId: reply.result_id ?? null,
                    answersUrl: reply.answers_url ?? null,
                    question: null,
                    selected: null,
                });
                return;
            }
            this.update({ phase: 'question', question: reply.next ?? null, selected: null });
        } catch (err) {
            if (err instanceof ApiFailure && err.code === 'out_of_order') {
                await this.resync();
                return;
            }
            if (err instanceof ApiFailure && err.code === 'session_not_active') {
                await this.routeToAnswersIfCompleted();
                return;
            }
            // network hiccup: resync before any resubmission to keep idempotence
            this.update({ phase: 'question' });
            await this.resync();
        }
    }
}
