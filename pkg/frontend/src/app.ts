/** Single-page shell: loads the catalog once (ETag-cached by the browser),
 * then switches between the annotator and clinician workspaces. */

import { HttpApiClient } from "./api.js";
import { AnnotatorWorkspace } from "./annotator.js";
import { CatalogIndex } from "./catalog.js";
import { ClinicianWorkspace } from "./clinician.js";

async function boot(): Promise<void> {
  const api = new HttpApiClient("");
  const catalog = new CatalogIndex(await api.getCatalog());

  const nav = document.getElementById("nav")!;
  const main = document.getElementById("main")!;

  const annotatorDiv = document.createElement("div");
  const clinicianDiv = document.createElement("div");
  main.append(annotatorDiv, clinicianDiv);

  const annotator = new AnnotatorWorkspace(annotatorDiv, api, catalog);
  const clinician = new ClinicianWorkspace(clinicianDiv, api, catalog);

  const docInput = document.createElement("input");
  docInput.placeholder = "document id";
  const openDoc = document.createElement("button");
  openDoc.textContent = "Abrir documento";
  openDoc.addEventListener("click", () => void annotator.open(docInput.value.trim()));

  const patientInput = document.createElement("input");
  patientInput.placeholder = "patient id";
  const openPatient = document.createElement("button");
  openPatient.textContent = "Abrir doente";
  openPatient.addEventListener("click",
    () => void clinician.openPatient(patientInput.value.trim()));

  const show = (which: "annotator" | "clinician") => {
    annotatorDiv.style.display = which === "annotator" ? "" : "none";
    clinicianDiv.style.display = which === "clinician" ? "" : "none";
  };
  const annotatorTab = document.createElement("button");
  annotatorTab.textContent = "Anotação";
  annotatorTab.addEventListener("click", () => show("annotator"));
  const clinicianTab = document.createElement("button");
  clinicianTab.textContent = "História do doente";
  clinicianTab.addEventListener("click", () => show("clinician"));

  nav.append(annotatorTab, clinicianTab, docInput, openDoc, patientInput, openPatient);
  show("annotator");
}

void boot();
