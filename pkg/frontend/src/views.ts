/**
 * HTML renderers. Pure string builders so they can be unit-tested without
 * a browser; main.ts injects the results into the page and wires events.
 */

import { OwnAnswers, Question, TeacherStats, UnitReport } from './api.js';
import { escapeAttr, escapeHtml } from './escape.js';
import { WizardState } from './wizard.js';

export function renderLanding(): string {
    return `<section class="card landing">
  <h1>Evaluarea cadrelor didactice</h1>
  <p>Chestionarul conține o serie de enunțuri despre activitatea cadrului didactic evaluat.
     Citiți fiecare enunț cu atenție și alegeți varianta care descrie cel mai bine situația.</p>
  <ul>
    <li>Răspundeți la toate întrebările, una după alta.</li>
    <li>Încercați să fiți obiectiv; evaluarea este complet anonimă.</li>
    <li>Chestionarul poate fi completat și trimis o singură dată.</li>
  </ul>
  <p class="warning"><strong>Atenție:</strong> odată oferit un răspuns, nu mai puteți reveni
     asupra lui și nici sări peste întrebări.</p>
  <button id="enter" class="primary">Intrați</button>
</section>`;
}

export function renderGateClosed(code: string): string {
    const notices: Record<string, { title: string; body: string }> = {
        evaluation_inactive: {
            title: 'Evaluarea nu este deschisă',
            body: 'Momentan nu se desfășoară nicio evaluare. Reveniți când administratorul activează sesiunea.',
        },
        ip_not_allowed: {
            title: 'Stație neautorizată',
            body: 'Evaluarea se poate face doar de la calculatoarele autorizate. Acest calculator nu este pe lista de acces.',
        },
        session_active_for_ip: {
            title: 'Evaluare deja în curs',
            body: 'De la acest calculator este deja deschis un chestionar. Finalizați-l sau așteptați expirarea lui.',
        },
    };
    const notice = notices[code] ?? { title: 'Acces indisponibil', body: code };
    return `<section class="card notice">
  <h1>${escapeHtml(notice.title)}</h1>
  <p>${escapeHtml(notice.body)}</p>
</section>`;
}

export function renderQuestion(state: WizardState): string {
    const question = state.question as Question;
    const options = question.options
        .map(
            (option) => `<label class="option">
      <input type="radio" name="answer" value="${option.value}"${
                state.selected === option.value ? ' checked' : ''
            }>
      <span>${option.value} - ${escapeHtml(option.label)}</span>
    </label>`,
        )
        .join('\n');
    const teacher = state.teacherName ? escapeHtml(state.teacherName) : '';
    return `<section class="card question">
  <header>
    <span class="teacher">Cadru didactic evaluat: ${teacher}</span>
    <span class="progress">Întrebarea ${question.index} din ${question.total}</span>
  </header>
  <p class="statement">${escapeHtml(question.text)}</p>
  <form id="answer-form">${options}</form>
  <button id="continue" class="primary"${state.selected === null ? ' disabled' : ''}>Continuați</button>
</section>`;
}

export function renderFinished(state: WizardState): string {
    const link = state.token
        ? `#/answers/${encodeURIComponent(state.token)}`
        : '#/';
    return `<section class="card notice">
  <h1>Chestionar trimis</h1>
  <p>Mulțumim! Răspunsurile au fost înregistrate anonim sub numărul
     <strong>${state.resultId ?? '-'}</strong>.</p>
  <p><a id="view-answers" href="${escapeAttr(link)}">Vizualizați răspunsurile dumneavoastră</a></p>
</section>`;
}

function answersTable(title: string, rows: OwnAnswers['direct']): string {
    const body = rows
        .map(
            (row) => `<tr>
      <td class="nr" title="${escapeAttr(row.text)}">${row.position}</td>
      <td>${row.score} - ${escapeHtml(row.label)}</td>
    </tr>`,
        )
        .join('\n');
    return `<table class="answers">
  <caption>${escapeHtml(title)}</caption>
  <thead><tr><th>Nr. enunț</th><th>Răspunsul oferit</th></tr></thead>
  <tbody>${body}</tbody>
</table>`;
}

export function renderOwnAnswers(view: OwnAnswers): string {
    const completed = new Date(view.completed_at);
    const stamp = isNaN(completed.getTime())
        ? escapeHtml(view.completed_at)
        : completed.toLocaleString('ro-RO');
    return `<section class="card answers-view printable">
  <h1>Chestionar nr.: ${view.result_id}</h1>
  <p>Cadru didactic evaluat: <strong>${escapeHtml(view.teacher.name)}</strong><br>
     Data evaluării: ${stamp}</p>
  <p class="actions no-print">
    [<a href="#/" id="close-view">închideți</a>]
    [<a href="javascript:window.print()" id="print-view">printați</a>]
  </p>
  <p class="hint no-print">Poziționați cursorul deasupra numărului din tabel pentru
     reamintirea textului enunțului.</p>
  <div class="columns">
    ${answersTable('Întrebări cu cotare directă', view.direct)}
    ${answersTable('Întrebări cu cotare inversă', view.reverse)}
  </div>
</section>`;
}

export function renderNotFound(): string {
    return `<section class="card notice">
  <h1>Chestionar inexistent</h1>
  <p>Nu există niciun chestionar pentru acest identificator. Linkul poate fi greșit sau expirat.</p>
</section>`;
}

function reportTable(report: UnitReport): string {
    const labels: Record<string, string> = {
        scientific: 'Competența științifică',
        psycho_pedagogical: 'Competența psihopedagogică',
        psychosocial: 'Competența psihosocială',
        managerial: 'Competența managerială',
    };
    const rows = Object.entries(report.per_competence)
        .map(
            ([key, block]) => `<tr>
      <td>${escapeHtml(labels[key] ?? key)}</td>
      <td>${block.mean.toFixed(2)}</td>
      <td>${escapeHtml(block.mark)}</td>
    </tr>`,
        )
        .join('\n');
    const overall = report.overall
        ? `<tr class="overall"><td>Punctaj general</td><td>${report.overall.mean.toFixed(2)}</td><td>${escapeHtml(report.overall.mark)}</td></tr>`
        : '';
    return `<table class="report">
  <thead><tr><th>Competență</th><th>Medie</th><th>Calificativ</th></tr></thead>
  <tbody>${rows}${overall}</tbody>
</table>`;
}

function histogram(counts: Record<string, number>): string {
    const total = Object.values(counts).reduce((a, b) => a + b, 0) || 1;
    return [1, 2, 3, 4, 5]
        .map((value) => {
            const n = counts[String(value)] ?? 0;
            const width = Math.round((n / total) * 100);
            return `<div class="bar-row"><span class="bar-label">${value}</span>
        <span class="bar" style="width:${width}%"></span><span class="bar-count">${n}</span></div>`;
        })
        .join('\n');
}

export function renderStats(stats: TeacherStats): string {
    const items = stats.per_item_distributions
        .map(
            (item) => `<details class="item-dist">
      <summary>Enunț ${item.index}</summary>
      ${histogram(item.counts)}
    </details>`,
        )
        .join('\n');
    const report = stats.count > 0
        ? reportTable(stats.unit_report)
        : '<p>Încă nu există chestionare finalizate.</p>';
    return `<section class="card stats">
  <h1>Statistici: ${escapeHtml(stats.teacher.name)}</h1>
  <p>Chestionare completate: <strong>${stats.count}</strong></p>
  ${report}
  <h2>Distribuția răspunsurilor pe enunț</h2>
  ${items}
</section>`;
}

export function renderError(message: string): string {
    return `<section class="card notice error">
  <h1>A apărut o problemă</h1>
  <p>${escapeHtml(message)}</p>
</section>`;
}
