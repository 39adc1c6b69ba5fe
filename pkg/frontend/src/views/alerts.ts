/**
 * Alert inbox: open alerts with acknowledge buttons and deep links into the
 * subject timeline at the alert's timestamp.
 */

import { AlertJson } from "../api.js";
import { clear, el } from "../dom.js";

export interface AlertCallbacks {
  onAck: (id: string) => Promise<void>;
  linkFor?: (alert: AlertJson) => string;
}

export function alertLink(alert: AlertJson): string {
  return `#/subjects/${alert.subject}/timeline@${alert.created_at}`;
}

export function renderAlertInbox(container: HTMLElement, alerts: AlertJson[],
                                 callbacks: AlertCallbacks): void {
  clear(container);
  const badge = el("span", { class: "alert-badge" }, String(alerts.length));
  container.append(el("h2", {}, "Alerts ", badge));
  if (!alerts.length) {
    container.append(el("p", { class: "empty-state" }, "Inbox zero."));
    return;
  }
  const list = el("ul", { class: "alert-list" });
  for (const alert of alerts) {
    const link = el("a", {
      href: (callbacks.linkFor ?? alertLink)(alert),
      class: "alert-link",
    }, `${alert.subject}: ${alert.kind}`);
    const ack = el("button", { class: "alert-ack", "data-alert": alert.id },
                   "Acknowledge");
    ack.addEventListener("click", () => callbacks.onAck(alert.id));
    list.append(el("li", { class: "alert", "data-kind": alert.kind }, link,
                   el("code", {}, JSON.stringify(alert.payload)), ack));
  }
  container.append(list);
}
