// Session log browser: list with sizes, verbatim CSV downloads.

import { listLogs, logDownloadUrl } from "./api.js";

export class LogsView {
  constructor(private root: HTMLElement) {}

  async load(): Promise<void> {
    this.root.textContent = "";
    let sessions;
    try {
      sessions = await listLogs();
    } catch (err) {
      this.root.textContent = `cannot list sessions: ${err}`;
      return;
    }
    if (sessions.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "No sessions recorded yet. Play something.";
      this.root.appendChild(empty);
      return;
    }
    const table = document.createElement("table");
    const head = table.insertRow();
    for (const title of ["session", "size", ""]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    for (const info of sessions) {
      const row = table.insertRow();
      row.insertCell().textContent = info.session;
      row.insertCell().textContent = formatSize(info.size_bytes);
      const link = document.createElement("a");
      link.href = logDownloadUrl(info.session);
      link.download = info.session;
      link.textContent = "download";
      row.insertCell().appendChild(link);
    }
    this.root.appendChild(table);
  }
}

function formatSize(bytes: number): string {
  if (bytes < 1024) return `${bytes} B`;
  if (bytes < 1024 * 1024) return `${(bytes / 1024).toFixed(1)} KiB`;
  return `${(bytes / (1024 * 1024)).toFixed(1)} MiB`;
}
