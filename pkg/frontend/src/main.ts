/** Browser entry point: bind the workbench to a running screening service.
 * The service URL comes from ?service=... (default http://127.0.0.1:8765). */

import { ServiceClient } from "./api.js";
import { mount } from "./dom.js";
import { WorkbenchSession } from "./session.js";
import type { WorksheetDoc } from "./types.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8765";
  const client = new ServiceClient(base);
  const session = new WorkbenchSession(client);

  const container = document.getElementById("workbench");
  if (!container) throw new Error("missing #workbench container");
  mount(session, container);

  const fileInput = document.getElementById("worksheet-file") as HTMLInputElement | null;
  fileInput?.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const doc = JSON.parse(await file.text()) as WorksheetDoc;
    await session.loadWorksheet(doc);
    await session.loadPresets().catch(() => undefined);
  });

  const exportButton = document.getElementById("worksheet-export");
  exportButton?.addEventListener("click", () => {
    const blob = new Blob([JSON.stringify(session.exportWorksheet(), null, 2) + "\n"], {
      type: "application/json",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "worksheet.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  const storedId = params.get("worksheet");
  if (storedId) {
    const response = await fetch(`${base}/worksheets/${storedId}`);
    if (response.ok) {
      await session.loadWorksheet((await response.json()) as WorksheetDoc);
      await session.loadPresets().catch(() => undefined);
    }
  }
}

void boot();
