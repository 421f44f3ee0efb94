/** DOM bootstrap: hash routing plus event wiring around the pure views. */

import { AdminFormModel, parseAllowlistText } from './admin.js';
import {
    renderAdminLogin,
    renderAdminShell,
    renderParameterForm,
    renderProfessorList,
    renderStatePanel,
} from './admin_views.js';
import { ApiClient, ApiFailure } from './api.js';
import {
    renderError,
    renderFinished,
    renderGateClosed,
    renderLanding,
    renderNotFound,
    renderOwnAnswers,
    renderQuestion,
    renderStats,
} from './views.js';
import { WizardController } from './wizard.js';

const api = new ApiClient();
const app = document.getElementById('app') as HTMLElement;

const wizard = new WizardController(api, (state) => {
    switch (state.phase) {
        case 'landing':
            app.innerHTML = renderLanding();
            bindLanding();
            break;
        case 'question':
        case 'submitting':
            if (state.question) {
                app.innerHTML = renderQuestion(state);
                bindQuestion();
            }
            break;
        case 'finished':
            app.innerHTML = renderFinished(state);
            if (state.token) {
                window.location.hash = `#/answers/${encodeURIComponent(state.token)}`;
            }
            break;
        case 'gate-closed':
            app.innerHTML = renderGateClosed(state.gateCode ?? 'error');
            break;
        case 'failed':
            app.innerHTML = renderError(state.errorMessage ?? 'eroare necunoscută');
            break;
    }
});

function bindLanding(): void {
    document.getElementById('enter')?.addEventListener('click', () => void wizard.begin());
}

function bindQuestion(): void {
    const form = document.getElementById('answer-form');
    form?.addEventListener('change', () => {
        const chosen = form.querySelector<HTMLInputElement>('input[name="answer"]:checked');
        if (chosen) wizard.select(Number(chosen.value));
    });
    document
        .getElementById('continue')
        ?.addEventListener('click', () => void wizard.continueToNext());
}

async function showAnswers(token: string): Promise<void> {
    try {
        const view = await api.ownAnswers(token);
        app.innerHTML = renderOwnAnswers(view);
    } catch (err) {
        if (err instanceof ApiFailure && err.status === 404) {
            app.innerHTML = renderNotFound();
        } else if (err instanceof ApiFailure && err.code === 'session_not_active') {
            app.innerHTML = renderError('Chestionarul nu a fost încă trimis.');
        } else {
            app.innerHTML = renderError(String(err));
        }
    }
}

async function showStats(teacherId: string): Promise<void> {
    try {
        app.innerHTML = renderStats(await api.teacherStats(teacherId));
    } catch (err) {
        app.innerHTML =
            err instanceof ApiFailure && err.status === 404 ? renderNotFound() : renderError(String(err));
    }
}

// -- admin console ----------------------------------------------------------

async function showAdmin(): Promise<void> {
    if (!api.hasAdminCredentials) {
        app.innerHTML = renderAdminLogin();
        bindAdminLogin();
        return;
    }
    try {
        const [state, teachers] = await Promise.all([api.adminState(), api.adminTeachers()]);
        const model = new AdminFormModel(state);
        app.innerHTML = renderAdminShell(
            renderStatePanel(state, teachers) +
                renderParameterForm(model, teachers) +
                renderProfessorList(teachers),
        );
        bindAdminConsole(model);
    } catch (err) {
        if (err instanceof ApiFailure && err.status === 401) {
            api.clearAdminCredentials();
            app.innerHTML = renderAdminLogin('Autentificare necesară.');
            bindAdminLogin();
            return;
        }
        app.innerHTML = renderError(String(err));
    }
}

function bindAdminLogin(): void {
    const form = document.getElementById('login-form') as HTMLFormElement | null;
    form?.addEventListener('submit', (event) => {
        event.preventDefault();
        const data = new FormData(form);
        api.setAdminCredentials(String(data.get('username') ?? ''), String(data.get('password') ?? ''));
        void showAdmin();
    });
}

function bindAdminConsole(model: AdminFormModel): void {
    document.getElementById('logout')?.addEventListener('click', () => {
        api.clearAdminCredentials();
        void showAdmin();
    });

    const active = document.getElementById('param-active') as HTMLInputElement | null;
    const teacher = document.getElementById('param-teacher') as HTMLSelectElement | null;
    const allowlist = document.getElementById('param-allowlist') as HTMLTextAreaElement | null;
    const apply = document.getElementById('apply-parameters') as HTMLButtonElement | null;
    const refreshApply = () => {
        if (apply) apply.disabled = !model.dirty;
    };
    active?.addEventListener('change', () => {
        model.stageActive(active.checked);
        refreshApply();
    });
    teacher?.addEventListener('change', () => {
        model.stageTeacher(teacher.value || null);
        refreshApply();
    });
    allowlist?.addEventListener('input', () => {
        model.stageAllowlist(parseAllowlistText(allowlist.value));
        refreshApply();
    });
    document.getElementById('parameter-form')?.addEventListener('submit', (event) => {
        event.preventDefault();
        void (async () => {
            try {
                model.applied(await api.adminApplyState(model.buildApplyBody()));
                await showAdmin();
            } catch (err) {
                const box = document.getElementById('parameter-error');
                if (box && err instanceof ApiFailure) {
                    box.textContent = `${err.code}: ${err.message}`;
                    box.hidden = false;
                } else {
                    app.innerHTML = renderError(String(err));
                }
            }
        })();
    });

    const addForm = document.getElementById('add-professor') as HTMLFormElement | null;
    const photoInput = addForm?.querySelector<HTMLInputElement>('input[name="photo"]') ?? null;
    photoInput?.addEventListener('change', () => {
        const preview = addForm?.querySelector<HTMLElement>('.preview');
        const img = preview?.querySelector('img');
        const file = photoInput.files?.[0];
        if (preview && img && file) {
            img.src = URL.createObjectURL(file);
            preview.hidden = false;
        }
    });
    addForm?.addEventListener('submit', (event) => {
        event.preventDefault();
        void (async () => {
            try {
                await api.adminAddTeacher(new FormData(addForm));
                await showAdmin();
            } catch (err) {
                showInlineError(addForm, err);
            }
        })();
    });

    document.querySelectorAll<HTMLFormElement>('form.professor[data-teacher]').forEach((form) => {
        form.addEventListener('submit', (event) => {
            event.preventDefault();
            const teacherId = form.dataset.teacher as string;
            void (async () => {
                try {
                    if (form.querySelector<HTMLInputElement>('input[name="delete_profile"]')?.checked) {
                        await api.adminDeleteTeacher(teacherId);
                    } else {
                        const data = new FormData();
                        const name = form.querySelector<HTMLInputElement>('input[name="full_name"]');
                        if (name) data.set('full_name', name.value);
                        const photo = form.querySelector<HTMLInputElement>('input[name="photo"]');
                        if (photo?.files?.length) data.set('photo', photo.files[0]);
                        await api.adminUpdateTeacher(teacherId, data);
                    }
                    await showAdmin();
                } catch (err) {
                    showInlineError(form, err);
                }
            })();
        });
    });
}

function showInlineError(form: HTMLFormElement, err: unknown): void {
    const box = form.querySelector<HTMLElement>('.inline-error');
    if (box && err instanceof ApiFailure) {
        box.textContent = `${err.code}: ${err.message}`;
        box.hidden = false;
    } else {
        app.innerHTML = renderError(String(err));
    }
}

// -- routing -------------------------------------------------------------------

function route(): void {
    const hash = window.location.hash || '#/';
    const answers = hash.match(/^#\/answers\/(.+)$/);
    const stats = hash.match(/^#\/stats\/(.+)$/);
    if (answers) {
        void showAnswers(decodeURIComponent(answers[1]));
    } else if (stats) {
        void showStats(decodeURIComponent(stats[1]));
    } else if (hash === '#/admin') {
        void showAdmin();
    } else if (wizard.state.phase !== 'landing' && wizard.state.token) {
        // refresh / back: the server decides which question is current
        void wizard.resync();
    } else {
        app.innerHTML = renderLanding();
        bindLanding();
    }
}

window.addEventListener('hashchange', route);
route();
