import { ReviewApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
const app = new ReviewApp(root);
void app.start();
