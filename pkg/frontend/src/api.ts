/**
 * Typed client for the evaluation service's JSON API.
 *
 * Every failed call throws an ApiFailure carrying the server's stable
 * error code, so views can branch on codes rather than status text.
 */

export interface QuestionOption {
    value: number;
    label: string;
}

export interface Question {
    index: number;
    total: number;
    text: string;
    options: QuestionOption[];
}

export interface SessionStart {
    token: string;
    teacher: { id: string; name: string };
    total: number;
    question: Question;
}

export interface AnswerReply {
    next?: Question;
    finished?: boolean;
    result_id?: number;
    answers_url?: string;
}

export interface AnswerRow {
    position: number;
    item_index: number;
    score: number;
    label: string;
    text: string;
}

export interface OwnAnswers {
    result_id: number;
    teacher: { id: string; name: string };
    completed_at: string;
    direct: AnswerRow[];
    reverse: AnswerRow[];
}

export interface ReportBlock {
    mean: number;
    mark: string;
}

export interface UnitReport {
    scope: { kind: string; id: string | null };
    questionnaire_count: number;
    per_competence: Record<string, ReportBlock>;
    overall: ReportBlock | null;
}

export interface TeacherStats {
    teacher: { id: string; name: string };
    count: number;
    unit_report: UnitReport;
    per_item_distributions: { index: number; counts: Record<string, number> }[];
}

export interface AdminState {
    active: boolean;
    selected_teacher: string | null;
    bank_digest: string;
    allowlist: string[];
}

export interface Teacher {
    teacher_id: string;
    full_name: string;
    chair_id: string;
    faculty_id: string;
    has_photo: boolean;
}

export interface ResultRow {
    result_id: number;
    teacher_id: string;
    completed_at: string;
    bank_digest: string;
    answers: number[];
}

export class ApiFailure extends Error {
    constructor(
        public status: number,
        public code: string,
        message: string,
    ) {
        super(message);
    }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function toFailure(response: Response): Promise<ApiFailure> {
    let code = 'error';
    let message = response.statusText;
    try {
        const body = await response.json();
        if (body && typeof body.code === 'string') code = body.code;
        if (body && typeof body.message === 'string') message = body.message;
    } catch {
        // non-JSON error body: keep defaults
    }
    return new ApiFailure(response.status, code, message);
}

export class ApiClient {
    constructor(
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
        private adminAuth: string | null = null,
    ) {}

    setAdminCredentials(username: string, password: string): void {
        this.adminAuth = 'Basic ' + btoa(`${username}:${password}`);
    }

    clearAdminCredentials(): void {
        this.adminAuth = null;
    }

    get hasAdminCredentials(): boolean {
        return this.adminAuth !== null;
    }

    private async request<T>(method: string, path: string, body?: unknown, form?: FormData): Promise<T> {
        const headers: Record<string, string> = {};
        const init: RequestInit = { method, headers };
        if (this.adminAuth && path.startsWith('/api/admin/')) {
            headers['Authorization'] = this.adminAuth;
        }
        if (form !== undefined) {
            init.body = form;
        } else if (body !== undefined) {
            headers['Content-Type'] = 'application/json';
            init.body = JSON.stringify(body);
        }
        const response = await this.fetchFn(path, init);
        if (!response.ok) throw await toFailure(response);
        return (await response.json()) as T;
    }

    startSession(): Promise<SessionStart> {
        return this.request('POST', '/api/session');
    }

    currentQuestion(token: string): Promise<Question> {
        return this.request('GET', `/api/session/${encodeURIComponent(token)}/question`);
    }

    submitAnswer(token: string, index: number, value: number): Promise<AnswerReply> {
        return this.request('POST', `/api/session/${encodeURIComponent(token)}/answer`, {
            index,
            value,
        });
    }

    ownAnswers(token: string): Promise<OwnAnswers> {
        return this.request('GET', `/api/results/own/${encodeURIComponent(token)}`);
    }

    teacherStats(teacherId: string): Promise<TeacherStats> {
        return this.request('GET', `/api/stats/${encodeURIComponent(teacherId)}`);
    }

    adminState(): Promise<AdminState> {
        return this.request('GET', '/api/admin/state');
    }

    adminApplyState(changes: Partial<AdminState>): Promise<AdminState> {
        return this.request('PUT', '/api/admin/state', changes);
    }

    adminTeachers(): Promise<Teacher[]> {
        return this.request('GET', '/api/admin/teachers');
    }

    adminAddTeacher(form: FormData): Promise<Teacher> {
        return this.request('POST', '/api/admin/teachers', undefined, form);
    }

    adminUpdateTeacher(teacherId: string, form: FormData): Promise<Teacher> {
        return this.request('PUT', `/api/admin/teachers/${encodeURIComponent(teacherId)}`, undefined, form);
    }

    adminDeleteTeacher(teacherId: string): Promise<{ deleted: string }> {
        return this.request('DELETE', `/api/admin/teachers/${encodeURIComponent(teacherId)}`);
    }

    adminReport(scope: string, id?: string): Promise<UnitReport> {
        const query = id ? `scope=${scope}&id=${encodeURIComponent(id)}` : `scope=${scope}`;
        return this.request('GET', `/api/admin/report?${query}`);
    }

    adminResults(teacherId?: string): Promise<ResultRow[]> {
        const query = teacherId ? `?teacher=${encodeURIComponent(teacherId)}` : '';
        return this.request('GET', `/api/admin/results${query}`);
    }
}
