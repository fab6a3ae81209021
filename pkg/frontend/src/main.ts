import { ExplorerApp, type AppRegions } from "./app";
import { HttpServiceClient } from "./client";

function region(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing region #${id}`);
  return el;
}

export function mount(baseUrl = ""): ExplorerApp {
  const regions: AppRegions = {
    flow: region("flow"),
    adjacency: region("adjacency"),
    legends: region("legends"),
    controls: region("controls"),
    subset: region("subset"),
    featurePanel: region("feature-panel"),
    status: region("status"),
  };
  const app = new ExplorerApp(regions, new HttpServiceClient(baseUrl));
  void app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("adjacency")) {
  mount();
}
