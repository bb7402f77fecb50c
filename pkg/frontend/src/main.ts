import { fetchCatalogs, requestReport, ServiceError } from "./api";
import { initialState, step, type Action, type ExplorerState } from "./flow";
import { renderApp } from "./render";
import { createStore } from "./store";
import "./style.css";

const BASE_URL = import.meta.env.VITE_SERVICE_URL ?? "";

async function boot() {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");

  let catalogs;
  try {
    catalogs = await fetchCatalogs(BASE_URL);
  } catch (err) {
    root.textContent =
      err instanceof ServiceError
        ? `service unavailable: ${err.message}`
        : "service unavailable; is `fairlab serve` running?";
    return;
  }

  const store = createStore<ExplorerState>(initialState());

  function dispatch(action: Action): void {
    const { state, request } = step(store.get(), action);
    store.set(state);
    if (request === null) return;
    const seq = state.seq; // responses for superseded selections are dropped
    requestReport(request, BASE_URL)
      .then((res) => dispatch({ kind: "report-loaded", seq, report: res.report }))
      .catch((err: unknown) =>
        dispatch({
          kind: "report-failed",
          seq,
          message: err instanceof Error ? err.message : String(err),
        }),
      );
  }

  store.subscribe((state) => renderApp(root, catalogs, state, dispatch));
  renderApp(root, catalogs, store.get(), dispatch);
}

void boot();
