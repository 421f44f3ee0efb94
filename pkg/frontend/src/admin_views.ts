/** Admin console renderers: login, state panel, parameter form, professors. */

import { AdminState, Teacher } from './api.js';
import { AdminFormModel } from './admin.js';
import { escapeAttr, escapeHtml } from './escape.js';

export function renderAdminLogin(errorMessage?: string): string {
    const error = errorMessage
        ? `<p class="inline-error">${escapeHtml(errorMessage)}</p>`
        : '';
    return `<section class="card admin-login">
  <h1>Administrare</h1>
  ${error}
  <form id="login-form">
    <label>Utilizator <input type="text" name="username" autocomplete="username"></label>
    <label>Parolă <input type="password" name="password" autocomplete="current-password"></label>
    <button class="primary" type="submit">Autentificare</button>
  </form>
</section>`;
}

export function renderStatePanel(state: AdminState, teachers: Teacher[]): string {
    const teacherName =
        teachers.find((t) => t.teacher_id === state.selected_teacher)?.full_name ?? '—';
    const ips = state.allowlist.length
        ? state.allowlist.map((ip) => `<code>${escapeHtml(ip)}</code>`).join(', ')
        : '—';
    return `<div class="panel state-panel">
  <h2>Starea aplicației</h2>
  <dl>
    <dt>Evaluare</dt><dd>${state.active ? 'activă' : 'inactivă'}</dd>
    <dt>Cadru didactic evaluat</dt><dd>${escapeHtml(teacherName)}</dd>
    <dt>Adrese IP permise</dt><dd>${ips}</dd>
  </dl>
</div>`;
}

export function renderParameterForm(model: AdminFormModel, teachers: Teacher[]): string {
    const body = { ...model.current, ...model.buildApplyBody() };
    const options = teachers
        .map(
            (t) => `<option value="${escapeAttr(t.teacher_id)}"${
                body.selected_teacher === t.teacher_id ? ' selected' : ''
            }>${escapeHtml(t.full_name)}</option>`,
        )
        .join('\n');
    const allowlist = (body.allowlist ?? []).join('\n');
    return `<div class="panel parameter-form">
  <h2>Modificare parametri</h2>
  <form id="parameter-form">
    <label class="row">
      <input type="checkbox" id="param-active"${body.active ? ' checked' : ''}>
      Evaluare activă
    </label>
    <label>Cadru didactic evaluat
      <select id="param-teacher">
        <option value=""${body.selected_teacher ? '' : ' selected'}>— niciunul —</option>
        ${options}
      </select>
    </label>
    <label>Adrese IP permise (una pe linie)
      <textarea id="param-allowlist" rows="4">${escapeHtml(allowlist)}</textarea>
    </label>
    <p id="parameter-error" class="inline-error" hidden></p>
    <button class="primary" id="apply-parameters" type="submit"${model.dirty ? '' : ' disabled'}>
      Actualizați
    </button>
  </form>
</div>`;
}

export function renderProfessorList(teachers: Teacher[]): string {
    const rows = teachers
        .map(
            (t) => `<form class="professor" data-teacher="${escapeAttr(t.teacher_id)}">
      <div class="photo">${
                t.has_photo
                    ? `<img src="/api/admin/teachers/${encodeURIComponent(t.teacher_id)}/photo" alt="">`
                    : '<span class="no-photo">fără foto</span>'
            }</div>
      <label>Numele complet:
        <input type="text" name="full_name" value="${escapeAttr(t.full_name)}">
      </label>
      <label>Calea către un nou fișier .jpg:
        <input type="file" name="photo" accept=".jpg,image/jpeg">
      </label>
      <label class="row">
        <input type="checkbox" name="delete_profile">
        Ștergeți acest profil
      </label>
      <p class="inline-error" hidden></p>
      <button class="primary" type="submit">Actualizați</button>
    </form>`,
        )
        .join('\n');
    return `<div class="panel professors">
  <h2>Cadre didactice</h2>
  ${rows || '<p>Niciun cadru didactic înregistrat.</p>'}
  <form id="add-professor" class="professor new">
    <h3>Adăugare</h3>
    <label>Numele complet: <input type="text" name="full_name"></label>
    <label>Catedra: <input type="text" name="chair_id"></label>
    <label>Facultatea: <input type="text" name="faculty_id"></label>
    <label>Fotografie (.jpg): <input type="file" name="photo" accept=".jpg,image/jpeg"></label>
    <div class="photo preview" hidden><img alt="previzualizare"></div>
    <p class="inline-error" hidden></p>
    <button class="primary" type="submit">Adăugați</button>
  </form>
</div>`;
}

export function renderAdminShell(inner: string): string {
    return `<section class="card admin">
  <header class="admin-header">
    <h1>Consolă de administrare</h1>
    <button id="logout" class="linkish">ieșire</button>
  </header>
  ${inner}
</section>`;
}
