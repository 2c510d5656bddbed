/** Wires the intake form, queue dashboard, and review pane together. */
import { ApiClient } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { IntakeForm } from "./intake.js";
import { ReviewPane } from "./review.js";
export function mountApp(doc, baseUrl = "") {
    const api = new ApiClient(baseUrl);
    const intakeRoot = doc.querySelector("#intake");
    const queueRoot = doc.querySelector("#queue");
    const reviewRoot = doc.querySelector("#review");
    if (!intakeRoot || !queueRoot || !reviewRoot) {
        throw new Error("app shell is missing #intake, #queue, or #review");
    }
    const review = new ReviewPane(reviewRoot, api, {
        onRerun: () => void dashboard.refresh(),
    });
    const dashboard = new Dashboard(queueRoot, api, {
        onOpenReview: (jobId) => void review.open(jobId),
    });
    const intake = new IntakeForm(intakeRoot, api, {
        onPending: (tempId, label) => dashboard.addOptimistic(tempId, label),
        onConfirmed: (tempId, jobId) => void dashboard.reconcile(tempId, jobId),
        onFailed: (tempId) => void dashboard.reconcile(tempId, null),
    });
    void intake.loadFolders();
    void dashboard.refresh();
    return dashboard;
}
// In the browser the shell boots itself; tests import mountApp instead.
if (typeof window !== "undefined" && window.document.querySelector("#queue")) {
    mountApp(window.document);
}
