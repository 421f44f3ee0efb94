/**
 * Admin console models.
 *
 * Parameter edits are staged locally and sent as one atomic PUT when the
 * operator applies them; nothing reaches the server before that.
 */

import { AdminState } from './api.js';

export interface StagedChanges {
    active?: boolean;
    selected_teacher?: string | null;
    allowlist?: string[];
}

export class AdminFormModel {
    private staged: StagedChanges = {};

    constructor(public current: AdminState) {}

    stageActive(active: boolean): void {
        if (active === this.current.active) {
            delete this.staged.active;
        } else {
            this.staged.active = active;
        }
    }

    stageTeacher(teacherId: string | null): void {
        if (teacherId === this.current.selected_teacher) {
            delete this.staged.selected_teacher;
        } else {
            this.staged.selected_teacher = teacherId;
        }
    }

    stageAllowlist(entries: string[]): void {
        const cleaned = entries.map((e) => e.trim()).filter((e) => e.length > 0);
        const same =
            cleaned.length === this.current.allowlist.length &&
            cleaned.every((ip, i) => ip === this.current.allowlist[i]);
        if (same) {
            delete this.staged.allowlist;
        } else {
            this.staged.allowlist = cleaned;
        }
    }

    get dirty(): boolean {
        return Object.keys(this.staged).length > 0;
    }

    /** Everything staged, as the body of the single apply request. */
    buildApplyBody(): StagedChanges {
        return { ...this.staged };
    }

    applied(fresh: AdminState): void {
        this.current = fresh;
        this.staged = {};
    }
}

export function parseAllowlistText(text: string): string[] {
    return text
        .split(/[\n,]/)
        .map((entry) => entry.trim())
        .filter((entry) => entry.length > 0);
}
