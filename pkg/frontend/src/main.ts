import { CurationApi } from "./api.js";
import { CurationApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new CurationApp(root, new CurationApi());
  void app.load();
}
