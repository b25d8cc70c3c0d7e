import { ConfigView } from "./config-view.js";
import { LogsView } from "./logs-view.js";
import { ModelView } from "./model-view.js";
import { MonitorView } from "./monitor-view.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

window.addEventListener("load", () => {
  const monitor = new MonitorView(byId("view-monitor"));
  const config = new ConfigView(byId("view-config"));
  const logs = new LogsView(byId("view-logs"));
  new ModelView(byId("view-model"));

  void monitor.start();
  void config.load();
  void logs.load();

  const tabs = document.querySelectorAll<HTMLButtonElement>("nav button");
  tabs.forEach((tab) => {
    tab.onclick = () => {
      tabs.forEach((other) => other.classList.toggle("active", other === tab));
      document.querySelectorAll<HTMLElement>(".view").forEach((view) => {
        view.classList.toggle("hidden", view.id !== `view-${tab.dataset.view}`);
      });
      if (tab.dataset.view === "logs") void logs.load();
      if (tab.dataset.view === "config") void config.load();
    };
  });
});
