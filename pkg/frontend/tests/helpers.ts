/** Fixture loading and a scripted fetch for contract tests. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { FetchLike } from "../src/api.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export function fixture<T = unknown>(name: string): T {
  return JSON.parse(readFileSync(join(HERE, "fixtures", `${name}.json`), "utf-8")) as T;
}

export interface Call {
  url: string;
  method: string;
  body: unknown;
  headers: Record<string, string>;
}

export type Route = (call: Call) => { status?: number; body: unknown } | unknown;

/**
 * Scripted fetch: routes map "METHOD path" (query string stripped) to either a
 * response body or a function of the recorded call.  Every call is logged.
 */
export function scriptedFetch(routes: Record<string, Route>):
    { fetch: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const impl: FetchLike = async (url, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const call: Call = {
      url,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
      headers: (init?.headers ?? {}) as Record<string, string>,
    };
    calls.push(call);
    const route = routes[`${method} ${path}`];
    if (route === undefined) {
      return new Response(JSON.stringify({ detail: `no route ${method} ${path}` }),
                          { status: 404 });
    }
    const result = typeof route === "function" ? (route as Route)(call) : route;
    const { status, body } =
      result && typeof result === "object" && "status" in (result as object)
        ? (result as { status?: number; body: unknown })
        : { status: 200, body: result };
    return new Response(JSON.stringify(body), {
      status: status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetch: impl, calls };
}

export function mount(): HTMLElement {
  document.body.innerHTML = "";
  const node = document.createElement("div");
  document.body.append(node);
  return node;
}
