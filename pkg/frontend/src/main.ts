import { ReviewApi } from "./api.js";
import { ReviewSession } from "./session.js";
import { ReviewApp } from "./ui.js";

function reviewerId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("reviewer");
  if (fromQuery) return fromQuery;
  const answer = window.prompt("reviewer id:");
  return answer && answer.trim() ? answer.trim() : "anonymous";
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const session = new ReviewSession(new ReviewApi(""), reviewerId());
void new ReviewApp(root, session).start();
